//! Classical potential surface of N ions in the anisotropic planar trap:
//! equilibrium finding, normal modes, anisotropy scans and ramp
//! adiabaticity.
//!
//! Everything here works in dimensionless units: lengths in units of the
//! characteristic length, energies in units of `e^2 / (4 pi eps0 l)`,
//! squared mode frequencies in units of `omega_z^2`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::minimize::{minimize, NewtonOpts, Objective};
use crate::phys::TrapConfig;

/// Ion positions (x_i, z_i) in units of the characteristic length.
#[derive(Debug, Clone, PartialEq)]
pub struct IonConfiguration {
    pub positions: Vec<[f64; 2]>,
}

impl IonConfiguration {
    pub fn new(positions: Vec<[f64; 2]>) -> Self {
        Self { positions }
    }

    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    /// Rigid rotation by `theta` in the x-z plane.
    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            positions: self
                .positions
                .iter()
                .map(|&[x, z]| [c * x - s * z, s * x + c * z])
                .collect(),
        }
    }

    /// Mirror through the x axis (z -> -z).
    pub fn mirrored_z(&self) -> Self {
        Self {
            positions: self.positions.iter().map(|&[x, z]| [x, -z]).collect(),
        }
    }

    /// Mirror through the z axis (x -> -x).
    pub fn mirrored_x(&self) -> Self {
        Self {
            positions: self.positions.iter().map(|&[x, z]| [-x, z]).collect(),
        }
    }

    /// Sum of squared radii (dimensionless moment of inertia for unit mass).
    pub fn radius_squared_sum(&self) -> f64 {
        self.positions.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum()
    }

    fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.positions.len());
        for p in &self.positions {
            out.push(p[0]);
            out.push(p[1]);
        }
        out
    }

    fn from_flat(x: &[f64]) -> Self {
        Self {
            positions: x.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        }
    }
}

/// Starting point for `find_equilibrium`.
#[derive(Debug, Clone)]
pub enum Seed {
    /// Equispaced chain along z.
    Chain,
    /// Regular N-gon with a vertex on +z.
    RingUp,
    /// Regular N-gon with a vertex on -z (exact z-mirror of `RingUp`).
    RingDown,
    Explicit(IonConfiguration),
}

impl std::str::FromStr for Seed {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Seed::Chain),
            "ring-up" => Ok(Seed::RingUp),
            "ring-down" => Ok(Seed::RingDown),
            other => Err(Error::InvalidInput(format!("unknown seed '{other}'"))),
        }
    }
}

const SEED_PERTURBATION: f64 = 1e-3;
const GRAD_TOL: f64 = 1e-10;
const SADDLE_EIG_TOL: f64 = -1e-8;
/// Curvature below which the orientation refinement considers the landscape
/// flat to machine precision.
const FLAT_EIG_TOL: f64 = -1e-12;

fn check_separations(pos: &[[f64; 2]]) -> Result<()> {
    for i in 0..pos.len() {
        for j in (i + 1)..pos.len() {
            let dx = pos[i][0] - pos[j][0];
            let dz = pos[i][1] - pos[j][1];
            let r = (dx * dx + dz * dz).sqrt();
            if r < 1e-12 {
                return Err(Error::SingularConfiguration { i, j, r });
            }
        }
    }
    Ok(())
}

/// Dimensionless potential
/// `V = sum_i (rho^2 x_i^2 + z_i^2)/2 + sum_{i>j} 1/r_ij`.
pub fn potential_energy(config: &TrapConfig, ions: &IonConfiguration) -> Result<f64> {
    check_separations(&ions.positions)?;
    Ok(potential_unchecked(config.anisotropy, &ions.flat()))
}

fn potential_unchecked(rho: f64, x: &[f64]) -> f64 {
    let rho2 = rho * rho;
    let n = x.len() / 2;
    let mut v = 0.0;
    for i in 0..n {
        v += 0.5 * (rho2 * x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[2 * i] - x[2 * j];
            let dz = x[2 * i + 1] - x[2 * j + 1];
            v += 1.0 / (dx * dx + dz * dz).sqrt();
        }
    }
    v
}

/// Analytic first derivatives of `potential_energy`, as a 2N vector in
/// (x_1, z_1, x_2, z_2, ...) order.
pub fn gradient(config: &TrapConfig, ions: &IonConfiguration) -> Result<Vec<f64>> {
    check_separations(&ions.positions)?;
    Ok(gradient_unchecked(config.anisotropy, &ions.flat()))
}

fn gradient_unchecked(rho: f64, x: &[f64]) -> Vec<f64> {
    let rho2 = rho * rho;
    let n = x.len() / 2;
    let mut g = vec![0.0; 2 * n];
    for i in 0..n {
        g[2 * i] = rho2 * x[2 * i];
        g[2 * i + 1] = x[2 * i + 1];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[2 * i] - x[2 * j];
            let dz = x[2 * i + 1] - x[2 * j + 1];
            let r2 = dx * dx + dz * dz;
            let inv_r3 = 1.0 / (r2 * r2.sqrt());
            g[2 * i] -= dx * inv_r3;
            g[2 * i + 1] -= dz * inv_r3;
            g[2 * j] += dx * inv_r3;
            g[2 * j + 1] += dz * inv_r3;
        }
    }
    g
}

/// Analytic Hessian of `potential_energy`, symmetric 2N x 2N.
pub fn hessian(config: &TrapConfig, ions: &IonConfiguration) -> Result<DMatrix<f64>> {
    check_separations(&ions.positions)?;
    Ok(hessian_unchecked(config.anisotropy, &ions.flat()))
}

fn hessian_unchecked(rho: f64, x: &[f64]) -> DMatrix<f64> {
    let rho2 = rho * rho;
    let n = x.len() / 2;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        h[(2 * i, 2 * i)] = rho2;
        h[(2 * i + 1, 2 * i + 1)] = 1.0;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[2 * i] - x[2 * j];
            let dz = x[2 * i + 1] - x[2 * j + 1];
            let r2 = dx * dx + dz * dz;
            let inv_r3 = 1.0 / (r2 * r2.sqrt());
            let inv_r5 = inv_r3 / r2;
            // pair block 3 d d^T / r^5 - I / r^3
            let bxx = 3.0 * dx * dx * inv_r5 - inv_r3;
            let bxz = 3.0 * dx * dz * inv_r5;
            let bzz = 3.0 * dz * dz * inv_r5 - inv_r3;
            let (ix, iz, jx, jz) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            h[(ix, ix)] += bxx;
            h[(ix, iz)] += bxz;
            h[(iz, ix)] += bxz;
            h[(iz, iz)] += bzz;
            h[(jx, jx)] += bxx;
            h[(jx, jz)] += bxz;
            h[(jz, jx)] += bxz;
            h[(jz, jz)] += bzz;
            h[(ix, jx)] -= bxx;
            h[(ix, jz)] -= bxz;
            h[(iz, jx)] -= bxz;
            h[(iz, jz)] -= bzz;
            h[(jx, ix)] -= bxx;
            h[(jx, iz)] -= bxz;
            h[(jz, ix)] -= bxz;
            h[(jz, iz)] -= bzz;
        }
    }
    h
}

/// Unnormalized rigid-rotation generator (-z_i, x_i).
fn rotation_generator(x: &[f64]) -> Vec<f64> {
    let n = x.len() / 2;
    let mut g = vec![0.0; 2 * n];
    for i in 0..n {
        g[2 * i] = -x[2 * i + 1];
        g[2 * i + 1] = x[2 * i];
    }
    g
}

struct CrystalObjective {
    rho: f64,
}

impl Objective for CrystalObjective {
    fn value(&self, x: &[f64]) -> f64 {
        potential_unchecked(self.rho, x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        gradient_unchecked(self.rho, x)
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        hessian_unchecked(self.rho, x)
    }
    /// The rigid-rotation component of a step is applied as an exact
    /// rotation. The orientation valley is too curved for linearized steps:
    /// a tangential displacement of size s stretches radii by O(s^2) and the
    /// stiff-mode cost swamps the orientation-scale energy gain.
    fn retract(&self, x: &[f64], d: &[f64]) -> Vec<f64> {
        let gen = rotation_generator(x);
        let gg: f64 = gen.iter().map(|v| v * v).sum();
        if gg < 1e-300 {
            return x.iter().zip(d).map(|(a, b)| a + b).collect();
        }
        let dphi: f64 = d.iter().zip(&gen).map(|(a, b)| a * b).sum::<f64>() / gg;
        let (s, c) = dphi.sin_cos();
        let mut out = Vec::with_capacity(x.len());
        for i in 0..x.len() / 2 {
            let px = x[2 * i] + (d[2 * i] - dphi * gen[2 * i]);
            let pz = x[2 * i + 1] + (d[2 * i + 1] - dphi * gen[2 * i + 1]);
            out.push(c * px - s * pz);
            out.push(s * px + c * pz);
        }
        out
    }
}

/// Orthonormal basis of the complement of the normalized rotation generator
/// at `reference`, as the trailing columns of a Householder reflector.
fn complement_basis(reference: &[f64]) -> Option<DMatrix<f64>> {
    let dim = reference.len();
    let gen = rotation_generator(reference);
    let norm: f64 = gen.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return None;
    }
    let ghat: Vec<f64> = gen.iter().map(|v| v / norm).collect();
    let mut v: Vec<f64> = ghat.clone();
    v[0] -= 1.0;
    let vnorm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut h = DMatrix::identity(dim, dim);
    if vnorm > 1e-14 {
        for a in v.iter_mut() {
            *a /= vnorm;
        }
        for r in 0..dim {
            for c in 0..dim {
                h[(r, c)] -= 2.0 * v[r] * v[c];
            }
        }
    }
    Some(h.columns(1, dim - 1).into_owned())
}

struct ProjectedObjective<'a> {
    rho: f64,
    reference: &'a [f64],
    basis: &'a DMatrix<f64>,
}

impl ProjectedObjective<'_> {
    fn embed(&self, y: &[f64]) -> Vec<f64> {
        let u = self.basis * DVector::from_column_slice(y);
        self.reference
            .iter()
            .zip(u.iter())
            .map(|(a, b)| a + b)
            .collect()
    }
}

impl Objective for ProjectedObjective<'_> {
    fn value(&self, y: &[f64]) -> f64 {
        potential_unchecked(self.rho, &self.embed(y))
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let g = gradient_unchecked(self.rho, &self.embed(y));
        (self.basis.transpose() * DVector::from_column_slice(&g))
            .as_slice()
            .to_vec()
    }
    fn hessian(&self, y: &[f64]) -> DMatrix<f64> {
        let h = hessian_unchecked(self.rho, &self.embed(y));
        self.basis.transpose() * h * self.basis
    }
}

/// Minimize the potential over displacements orthogonal to the rotation
/// generator at `reference` (the relaxed shape at a pinned orientation).
/// Returns the relaxed energy and configuration, or the residual gradient
/// max-norm on failure.
pub(crate) fn relax_orthogonal(
    config: &TrapConfig,
    reference: &IonConfiguration,
) -> std::result::Result<(f64, IonConfiguration), f64> {
    let refx = reference.flat();
    let basis = match complement_basis(&refx) {
        Some(b) => b,
        // generator vanishes (single ion at the origin): nothing to relax
        None => {
            return Ok((
                potential_unchecked(config.anisotropy, &refx),
                reference.clone(),
            ))
        }
    };
    let obj = ProjectedObjective {
        rho: config.anisotropy,
        reference: &refx,
        basis: &basis,
    };
    let out = minimize(
        &obj,
        &vec![0.0; basis.ncols()],
        NewtonOpts {
            gtol: 1e-11,
            max_iter: 200,
            ..Default::default()
        },
    );
    if !out.converged {
        return Err(out.grad_norm);
    }
    let q = IonConfiguration::from_flat(&obj.embed(&out.x));
    Ok((potential_unchecked(config.anisotropy, &q.flat()), q))
}

fn ring_radius(n: usize) -> f64 {
    let mut c = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            c += 1.0 / (2.0 * (std::f64::consts::PI * (j - i) as f64 / n as f64).sin());
        }
    }
    (c / n as f64).cbrt()
}

fn perturb(mut q: IonConfiguration) -> IonConfiguration {
    for (k, p) in q.positions.iter_mut().enumerate() {
        let k = k as f64;
        p[0] += SEED_PERTURBATION * (0.7 + 1.3 * k).cos();
        p[1] += SEED_PERTURBATION * (1.1 + 2.1 * k).sin();
    }
    q
}

fn build_seed(config: &TrapConfig, seed: &Seed) -> Result<IonConfiguration> {
    let n = config.n_ions;
    match seed {
        Seed::Chain => {
            let d = (5.0 / 4.0_f64).cbrt(); // exact for N=3, adequate elsewhere
            let offset = 0.5 * (n as f64 - 1.0);
            Ok(perturb(IonConfiguration::new(
                (0..n).map(|i| [0.0, d * (i as f64 - offset)]).collect(),
            )))
        }
        Seed::RingUp => {
            let r = ring_radius(n);
            Ok(perturb(IonConfiguration::new(
                (0..n)
                    .map(|k| {
                        let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                        [r * phi.sin(), r * phi.cos()]
                    })
                    .collect(),
            )))
        }
        // exact z-mirror of the ring-up seed, perturbation included, so the
        // two results are mirror images to the extent the arithmetic is
        // sign-symmetric
        Seed::RingDown => Ok(build_seed(config, &Seed::RingUp)?.mirrored_z()),
        Seed::Explicit(q) => {
            if q.n_ions() != n {
                return Err(Error::InvalidInput(format!(
                    "seed has {} ions, config expects {}",
                    q.n_ions(),
                    n
                )));
            }
            Ok(q.clone())
        }
    }
}

/// Find a local minimum of the crystal potential.
///
/// Newton descent first converges to a stationary point; because the
/// orientation landscape of near-isotropic odd crystals is flatter than the
/// gradient tolerance can resolve, a refinement pass then compares the
/// relaxed energy at the two quarter-period rotations and re-polishes from
/// the lower one. The result satisfies gradient max-norm < 1e-10 and has no
/// Hessian eigenvalue below -1e-8.
pub fn find_equilibrium(config: &TrapConfig, seed: &Seed) -> Result<IonConfiguration> {
    let q0 = build_seed(config, seed)?;
    check_separations(&q0.positions)?;
    let obj = CrystalObjective {
        rho: config.anisotropy,
    };
    let opts = NewtonOpts {
        gtol: GRAD_TOL,
        ..Default::default()
    };
    let out = minimize(&obj, &q0.flat(), opts);
    if !out.converged {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            grad_norm: out.grad_norm,
            last: IonConfiguration::from_flat(&out.x),
        });
    }
    let mut x = out.x;

    // orientation refinement: stationary points of the full problem are
    // extrema of the relaxed orientation landscape, whose scale can sit far
    // below the gradient tolerance; adjacent extrema lie a quarter period
    // away
    if config.n_ions >= 2 {
        let q = IonConfiguration::from_flat(&x);
        let f0 = potential_unchecked(config.anisotropy, &x);
        let half_well = std::f64::consts::PI / (2.0 * config.n_ions as f64);
        let mut best: Option<(f64, IonConfiguration)> = None;
        for s in [half_well, -half_well] {
            if let Ok((fc, qc)) = relax_orthogonal(config, &q.rotated(s)) {
                if fc < f0 && best.as_ref().is_none_or(|(fb, _)| fc < *fb) {
                    best = Some((fc, qc));
                }
            }
        }
        if let Some((_, qc)) = best {
            let out2 = minimize(&obj, &qc.flat(), opts);
            if !out2.converged {
                return Err(Error::NonConvergence {
                    iterations: out2.iterations,
                    grad_norm: out2.grad_norm,
                    last: IonConfiguration::from_flat(&out2.x),
                });
            }
            x = out2.x;
        }
    }

    let q = IonConfiguration::from_flat(&x);
    let h = hessian_unchecked(config.anisotropy, &x);
    let eig = h.symmetric_eigen();
    let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if lambda_min < SADDLE_EIG_TOL {
        return Err(Error::Saddle { lambda_min, at: q });
    }
    let _ = FLAT_EIG_TOL;
    Ok(q)
}

/// Collective-mode label, assigned by eigenvector overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabel {
    Rotational,
    ComX,
    ComZ,
    Other,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeLabel::Rotational => write!(f, "rotational"),
            ModeLabel::ComX => write!(f, "com_x"),
            ModeLabel::ComZ => write!(f, "com_z"),
            ModeLabel::Other => write!(f, "other"),
        }
    }
}

/// Collective-mode spectrum at an equilibrium: frequencies in units of
/// omega_z, ascending, with orthonormal displacement patterns.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub frequencies: Vec<f64>,
    /// `eigenvectors[k][i]` is the (dx, dz) displacement of ion i in mode k.
    pub eigenvectors: Vec<Vec<[f64; 2]>>,
    pub labels: Vec<ModeLabel>,
}

impl ModeSpectrum {
    pub fn rotational_frequency(&self) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| *l == ModeLabel::Rotational)
            .map(|i| self.frequencies[i])
    }

    fn eigenvector_flat(&self, k: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.eigenvectors[k].len());
        for p in &self.eigenvectors[k] {
            v.push(p[0]);
            v.push(p[1]);
        }
        v
    }
}

fn overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs()
}

/// Normal-mode analysis at an equilibrium: frequencies omega_k / omega_z =
/// sqrt(lambda_k) from the dimensionless Hessian, eigenvectors orthonormal,
/// the rotational mode identified by maximal overlap with the rigid-rotation
/// generator.
pub fn normal_modes(config: &TrapConfig, equilibrium: &IonConfiguration) -> Result<ModeSpectrum> {
    let h = hessian(config, equilibrium)?;
    let dim = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let lambda_min = eig.eigenvalues[order[0]];
    if lambda_min < SADDLE_EIG_TOL {
        return Err(Error::UnstableEquilibrium { lambda_min });
    }

    let mut frequencies = Vec::with_capacity(dim);
    let mut eigenvectors = Vec::with_capacity(dim);
    for &k in &order {
        frequencies.push(eig.eigenvalues[k].max(0.0).sqrt());
        let col = eig.eigenvectors.column(k);
        // canonical sign: largest-magnitude component positive
        let mut imax = 0;
        for i in 0..dim {
            if col[i].abs() > col[imax].abs() {
                imax = i;
            }
        }
        let sign = if col[imax] < 0.0 { -1.0 } else { 1.0 };
        let mut vec_pairs = Vec::with_capacity(dim / 2);
        for i in 0..dim / 2 {
            vec_pairs.push([sign * col[2 * i], sign * col[2 * i + 1]]);
        }
        eigenvectors.push(vec_pairs);
    }

    let n = dim / 2;
    let mut labels = vec![ModeLabel::Other; dim];
    let gen = rotation_generator(&equilibrium.flat());
    let gen_norm: f64 = gen.iter().map(|v| v * v).sum::<f64>().sqrt();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut com_x = vec![0.0; dim];
    let mut com_z = vec![0.0; dim];
    for i in 0..n {
        com_x[2 * i] = inv_sqrt_n;
        com_z[2 * i + 1] = inv_sqrt_n;
    }
    let spectrum = ModeSpectrum {
        frequencies,
        eigenvectors,
        labels: labels.clone(),
    };
    let mut taken = vec![false; dim];
    let mut assign = |pattern: &[f64], label: ModeLabel, labels: &mut Vec<ModeLabel>| {
        let mut best = None;
        #[allow(clippy::needless_range_loop)]
        for k in 0..dim {
            if taken[k] {
                continue;
            }
            let ov = overlap(&spectrum.eigenvector_flat(k), pattern);
            if best.is_none_or(|(_, b)| ov > b) {
                best = Some((k, ov));
            }
        }
        if let Some((k, _)) = best {
            taken[k] = true;
            labels[k] = label;
        }
    };
    if gen_norm > 1e-12 {
        let ghat: Vec<f64> = gen.iter().map(|v| v / gen_norm).collect();
        assign(&ghat, ModeLabel::Rotational, &mut labels);
    }
    assign(&com_x, ModeLabel::ComX, &mut labels);
    assign(&com_z, ModeLabel::ComZ, &mut labels);

    Ok(ModeSpectrum {
        labels,
        ..spectrum
    })
}

/// Mode spectra over an anisotropy grid with continuation seeding and
/// eigenvector-overlap mode tracking.
#[derive(Debug, Clone)]
pub struct ModeScan {
    pub ratios: Vec<f64>,
    pub spectra: Vec<ModeSpectrum>,
    /// `stable_ids[r][k]` is the tracked identity of sorted mode k at grid
    /// point r; identities are the sorted indices at the first grid point.
    pub stable_ids: Vec<Vec<usize>>,
}

impl ModeScan {
    /// Frequency of the tracked mode `id` at grid point `r`.
    pub fn tracked_frequency(&self, r: usize, id: usize) -> Option<f64> {
        self.stable_ids[r]
            .iter()
            .position(|&s| s == id)
            .map(|k| self.spectra[r].frequencies[k])
    }
}

/// Scan the mode spectrum over anisotropy ratios. Equilibria are re-seeded
/// by continuation from the previous grid point; the output ordering is
/// deterministic.
pub fn scan_modes(config: &TrapConfig, ratio_grid: &[f64], seed: &Seed) -> Result<ModeScan> {
    if ratio_grid.is_empty() {
        return Err(Error::InvalidInput("empty anisotropy grid".into()));
    }
    for &r in ratio_grid {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "anisotropy grid values must be finite and >= 1, got {r}"
            )));
        }
    }
    let mut spectra: Vec<ModeSpectrum> = Vec::with_capacity(ratio_grid.len());
    let mut stable_ids: Vec<Vec<usize>> = Vec::with_capacity(ratio_grid.len());
    let mut current_seed = seed.clone();
    let wrap = |ratio: f64| move |e: Error| Error::ScanFailure {
        ratio,
        source: Box::new(e),
    };
    for (idx, &ratio) in ratio_grid.iter().enumerate() {
        let cfg = config.with_anisotropy(ratio);
        let eq = find_equilibrium(&cfg, &current_seed).map_err(wrap(ratio))?;
        let spec = normal_modes(&cfg, &eq).map_err(wrap(ratio))?;
        let ids = if idx == 0 {
            (0..spec.frequencies.len()).collect()
        } else {
            track_modes(&spectra[idx - 1], &stable_ids[idx - 1], &spec)
        };
        stable_ids.push(ids);
        spectra.push(spec);
        current_seed = Seed::Explicit(eq);
    }
    Ok(ModeScan {
        ratios: ratio_grid.to_vec(),
        spectra,
        stable_ids,
    })
}

/// Greedy assignment by descending eigenvector overlap, ties broken by
/// frequency proximity; keeps labels stable through avoided crossings.
fn track_modes(prev: &ModeSpectrum, prev_ids: &[usize], next: &ModeSpectrum) -> Vec<usize> {
    let m = next.frequencies.len();
    let mut pairs = Vec::with_capacity(m * m);
    for i in 0..m {
        let vi = prev.eigenvector_flat(i);
        for j in 0..m {
            let ov = overlap(&vi, &next.eigenvector_flat(j));
            let df = (prev.frequencies[i] - next.frequencies[j]).abs();
            pairs.push((i, j, ov, df));
        }
    }
    pairs.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then(a.3.partial_cmp(&b.3).unwrap())
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    let mut ids = vec![usize::MAX; m];
    let mut used_prev = vec![false; m];
    let mut assigned = 0;
    for (i, j, _, _) in pairs {
        if used_prev[i] || ids[j] != usize::MAX {
            continue;
        }
        ids[j] = prev_ids[i];
        used_prev[i] = true;
        assigned += 1;
        if assigned == m {
            break;
        }
    }
    ids
}

/// One point of a trap ramp: time (s) and omega_x (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSample {
    pub time: f64,
    pub omega_x: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AdiabatSample {
    pub time: f64,
    pub omega_x: f64,
    pub omega_rot: f64,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct AdiabaticityTrace {
    pub eta_max: f64,
    pub samples: Vec<AdiabatSample>,
}

/// Adiabaticity of an omega_x(t) ramp: eta(t) = |d omega_rot / dt| /
/// omega_rot^2, computed along the continuation of the crystal equilibrium,
/// with the maximum over the ramp returned alongside the full trace.
pub fn adiabaticity(
    config: &TrapConfig,
    ramp: &[RampSample],
    seed: &Seed,
) -> Result<AdiabaticityTrace> {
    if ramp.len() < 2 {
        return Err(Error::InvalidInput(
            "ramp needs at least two samples".into(),
        ));
    }
    for w in ramp.windows(2) {
        if w[1].time <= w[0].time || !w[1].time.is_finite() || !w[0].time.is_finite() {
            return Err(Error::InvalidInput(
                "ramp times must be strictly increasing".into(),
            ));
        }
    }
    for (i, s) in ramp.iter().enumerate() {
        let ratio = s.omega_x / config.omega_z;
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(Error::RampCrossesIsotropy { ratio, index: i });
        }
    }

    let mut omega_rot = Vec::with_capacity(ramp.len());
    let mut current_seed = seed.clone();
    for s in ramp {
        let cfg = config.with_anisotropy(s.omega_x / config.omega_z);
        let eq = find_equilibrium(&cfg, &current_seed)?;
        let spec = normal_modes(&cfg, &eq)?;
        let f = spec.rotational_frequency().ok_or_else(|| {
            Error::InvalidInput("no rotational mode identified along ramp".into())
        })?;
        omega_rot.push(config.omega_z * f);
        current_seed = Seed::Explicit(eq);
    }

    let m = ramp.len();
    let mut samples = Vec::with_capacity(m);
    let mut eta_max = 0.0_f64;
    for i in 0..m {
        let dwdt = if i == 0 {
            (omega_rot[1] - omega_rot[0]) / (ramp[1].time - ramp[0].time)
        } else if i == m - 1 {
            (omega_rot[m - 1] - omega_rot[m - 2]) / (ramp[m - 1].time - ramp[m - 2].time)
        } else {
            (omega_rot[i + 1] - omega_rot[i - 1]) / (ramp[i + 1].time - ramp[i - 1].time)
        };
        let eta = dwdt.abs() / (omega_rot[i] * omega_rot[i]);
        eta_max = eta_max.max(eta);
        samples.push(AdiabatSample {
            time: ramp[i].time,
            omega_x: ramp[i].omega_x,
            omega_rot: omega_rot[i],
            eta,
        });
    }
    Ok(AdiabaticityTrace { eta_max, samples })
}
