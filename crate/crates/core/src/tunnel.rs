//! Periodic Schroedinger problem on the reduced orientation ring and the
//! tunneling doublet.
//!
//! H = -(hbar^2 / 2I) d^2/dtheta^2 + V(theta) on [0, 2 pi / N) with periodic
//! boundary conditions (single-valuedness under the identical-particle
//! rotation). Two discretizations are provided as mutual cross-checks: the
//! plane-wave basis e^{i m N theta}, assembled in its real cosine/sine
//! representation so the matrix stays real symmetric, and a second-order
//! central-difference stencil with wraparound.

use nalgebra::DMatrix;

use crate::crystal::{find_equilibrium, IonConfiguration, Seed};
use crate::error::{Error, Result};
use crate::phys::{TrapConfig, HBAR, PLANCK};
use crate::rotor::{effective_potential_from, PotentialMethod, RotorPotential};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingMethod {
    Fourier,
    FiniteDifference,
}

impl std::fmt::Display for RingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RingMethod::Fourier => write!(f, "fourier"),
            RingMethod::FiniteDifference => write!(f, "finite_difference"),
        }
    }
}

/// Self-check of a ring solve: the splitting is re-computed at half the
/// resolution and flagged unconverged when it moves by more than 1%.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceCheck {
    pub splitting_rel_change: f64,
    pub converged: bool,
}

/// Two lowest ring eigenstates and the derived tunneling quantities.
#[derive(Debug, Clone)]
pub struct TunnelDoublet {
    /// Ground and first excited energies (J), potential offset included.
    pub e0: f64,
    pub e1: f64,
    /// e1 - e0 (J).
    pub splitting: f64,
    /// splitting / (2 hbar), rad/s.
    pub rate_j: f64,
    /// splitting / h, Hz.
    pub rate_hz: f64,
    /// Sampling grid of the eigenfunctions, `resolution` points on the
    /// reduced period.
    pub theta_grid: Vec<f64>,
    pub psi0: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi_up: Vec<f64>,
    pub psi_down: Vec<f64>,
    pub method: RingMethod,
    pub resolution: usize,
    pub convergence: ConvergenceCheck,
}

/// Rate conventions. The doublet splitting is the one physical output; both
/// ways of quoting it as a rate are computed so the choice stays visible.
pub fn splitting_to_rate_hz(splitting: f64) -> f64 {
    splitting / PLANCK
}

pub fn splitting_to_rate_j(splitting: f64) -> f64 {
    splitting / (2.0 * HBAR)
}

/// Harmonic content of the sampled potential on its own grid:
/// c_p = mean(V cos(p N theta)), s_p = mean(V sin(p N theta)).
fn harmonic_coefficients(pot: &RotorPotential, pmax: usize) -> (Vec<f64>, Vec<f64>) {
    let g = pot.values_joule.len();
    let base = pot.n_ions as f64;
    let avail = g / 2 - 1;
    let mut c = vec![0.0; pmax + 1];
    let mut s = vec![0.0; pmax + 1];
    for p in 0..=pmax.min(avail) {
        let pb = p as f64 * base;
        let mut cs = 0.0;
        let mut ss = 0.0;
        for (i, &v) in pot.values_joule.iter().enumerate() {
            let ang = pb * pot.theta_grid[i];
            cs += v * ang.cos();
            ss += v * ang.sin();
        }
        c[p] = cs / g as f64;
        s[p] = ss / g as f64;
    }
    (c, s)
}

/// Trigonometric interpolation of the sampled potential onto `resolution`
/// uniform points (exact for the band-limited representation).
fn resample_joule(pot: &RotorPotential, resolution: usize) -> Vec<f64> {
    let g = pot.values_joule.len();
    if resolution == g {
        return pot.values_joule.clone();
    }
    let (c, s) = harmonic_coefficients(pot, g / 2 - 1);
    let period = pot.period();
    let base = pot.n_ions as f64;
    (0..resolution)
        .map(|i| {
            let theta = i as f64 * period / resolution as f64;
            let mut v = c[0];
            for p in 1..c.len() {
                let ang = p as f64 * base * theta;
                v += 2.0 * (c[p] * ang.cos() + s[p] * ang.sin());
            }
            v
        })
        .collect()
}

fn validate(pot: &RotorPotential, resolution: usize) -> Result<()> {
    if !(pot.inertia.is_finite() && pot.inertia > 0.0) {
        return Err(Error::InvalidInput(format!(
            "moment of inertia must be positive, got {}",
            pot.inertia
        )));
    }
    if resolution < 128 {
        return Err(Error::InvalidInput(format!(
            "resolution must be >= 128, got {resolution}"
        )));
    }
    if !resolution.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "resolution must be even, got {resolution}"
        )));
    }
    if pot.values_joule.len() < 8 {
        return Err(Error::InvalidInput(
            "potential grid too small".to_string(),
        ));
    }
    Ok(())
}

/// Lowest `count` eigenvalues and eigenfunctions (sampled on the resolution
/// grid, quadrature-normalized). No resolution floor; callers validate.
///
/// The potential minimum is shifted out of the matrix before
/// diagonalization and restored afterwards: the offset is a multiple of the
/// identity, but left in place it costs several digits of the doublet
/// splitting through the eigensolver's absolute error.
fn solve_internal(
    pot: &RotorPotential,
    resolution: usize,
    method: RingMethod,
    count: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let period = pot.period();
    let dtheta = period / resolution as f64;
    let kin = HBAR * HBAR / (2.0 * pot.inertia);
    let base = pot.n_ions as f64;
    let vshift = pot
        .values_joule
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    let (evals_all, sample): (Vec<f64>, Sampler) = match method {
        RingMethod::Fourier => {
            let m = resolution / 2;
            let dim = 2 * m + 1;
            let (mut c, s) = harmonic_coefficients(pot, 2 * m);
            c[0] -= vshift;
            let sp = |p: i64| -> f64 {
                if p >= 0 {
                    s[p as usize]
                } else {
                    -s[(-p) as usize]
                }
            };
            let mut h = DMatrix::zeros(dim, dim);
            h[(0, 0)] = c[0];
            let sqrt2 = 2.0_f64.sqrt();
            for k in 1..=m {
                h[(0, k)] = sqrt2 * c[k];
                h[(k, 0)] = h[(0, k)];
                h[(0, m + k)] = sqrt2 * s[k];
                h[(m + k, 0)] = h[(0, m + k)];
                let t = kin * (k as f64 * base) * (k as f64 * base);
                h[(k, k)] = t + c[0] + c[2 * k];
                h[(m + k, m + k)] = t + c[0] - c[2 * k];
                // <cos k|V|sin k'> = s_{k+k'} + s_{k'-k}
                h[(k, m + k)] = s[2 * k];
                h[(m + k, k)] = s[2 * k];
                for kp in (k + 1)..=m {
                    let cc = c[kp - k] + c[kp + k];
                    h[(k, kp)] = cc;
                    h[(kp, k)] = cc;
                    let ss = c[kp - k] - c[kp + k];
                    h[(m + k, m + kp)] = ss;
                    h[(m + kp, m + k)] = ss;
                    let cs = s[k + kp] + sp(kp as i64 - k as i64);
                    h[(k, m + kp)] = cs;
                    h[(m + kp, k)] = cs;
                    let sc = s[k + kp] + sp(k as i64 - kp as i64);
                    h[(m + k, kp)] = sc;
                    h[(kp, m + k)] = sc;
                }
            }
            let eig = h.symmetric_eigen();
            let vecs = eig.eigenvectors;
            let vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
            let theta: Vec<f64> = (0..resolution).map(|i| i as f64 * dtheta).collect();
            let sqrt_l = period.sqrt();
            let order = sorted_indices(&vals);
            let sampler = move |rank: usize| -> Vec<f64> {
                let col = vecs.column(order[rank]);
                let mut psi = vec![col[0] / sqrt_l; resolution];
                for k in 1..=m {
                    let amp_c = col[k] * sqrt2 / sqrt_l;
                    let amp_s = col[m + k] * sqrt2 / sqrt_l;
                    if amp_c.abs() < 1e-300 && amp_s.abs() < 1e-300 {
                        continue;
                    }
                    let kb = k as f64 * base;
                    for (i, &th) in theta.iter().enumerate() {
                        let ang = kb * th;
                        psi[i] += amp_c * ang.cos() + amp_s * ang.sin();
                    }
                }
                psi
            };
            let mut sorted = vals.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (sorted, Box::new(sampler))
        }
        RingMethod::FiniteDifference => {
            let mut v = resample_joule(pot, resolution);
            v.iter_mut().for_each(|x| *x -= vshift);
            let t = kin / (dtheta * dtheta);
            let mut h = DMatrix::zeros(resolution, resolution);
            for i in 0..resolution {
                h[(i, i)] = 2.0 * t + v[i];
                let j = (i + 1) % resolution;
                h[(i, j)] -= t;
                h[(j, i)] -= t;
            }
            let eig = h.symmetric_eigen();
            let vecs = eig.eigenvectors;
            let vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
            let order = sorted_indices(&vals);
            let inv_sqrt_dt = 1.0 / dtheta.sqrt();
            let sampler = move |rank: usize| -> Vec<f64> {
                vecs.column(order[rank])
                    .iter()
                    .map(|x| x * inv_sqrt_dt)
                    .collect()
            };
            let mut sorted = vals.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (sorted, Box::new(sampler))
        }
    };

    let take = count.min(evals_all.len());
    let mut states = Vec::with_capacity(take);
    for rank in 0..take {
        let mut psi = sample(rank);
        // exact unit norm under the grid quadrature
        let norm: f64 = psi.iter().map(|x| x * x).sum::<f64>() * dtheta;
        let scale = 1.0 / norm.sqrt();
        psi.iter_mut().for_each(|x| *x *= scale);
        states.push(psi);
    }
    (evals_all, states)
}

type Sampler = Box<dyn Fn(usize) -> Vec<f64>>;

fn sorted_indices(vals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap().then(a.cmp(&b)));
    idx
}

/// Lowest `count` ring eigenvalues (J).
pub fn ring_eigenvalues(
    pot: &RotorPotential,
    resolution: usize,
    method: RingMethod,
    count: usize,
) -> Result<Vec<f64>> {
    validate(pot, resolution)?;
    let vshift = pot
        .values_joule
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(solve_internal(pot, resolution, method, 0).0[..count]
        .iter()
        .map(|e| e + vshift)
        .collect())
}

/// Solve the ring problem and assemble the tunneling doublet.
///
/// Eigenfunction phases are fixed by requiring psi0 and psi1 positive at the
/// potential minimum, which pins psi_up = (psi0 + psi1)/sqrt(2) to the
/// theta = 0 well.
pub fn solve_ring(
    pot: &RotorPotential,
    resolution: usize,
    method: RingMethod,
) -> Result<TunnelDoublet> {
    validate(pot, resolution)?;
    let (evals, mut states) = solve_internal(pot, resolution, method, 2);
    let vshift = pot
        .values_joule
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let (e0, e1) = (evals[0] + vshift, evals[1] + vshift);
    let splitting = evals[1] - evals[0];

    // half-resolution cross solve as the convergence indicator
    let (half, _) = solve_internal(pot, resolution / 2, method, 0);
    let half_split = half[1] - half[0];
    let denom = splitting.abs().max(1e-300);
    let rel = ((half_split - splitting) / denom).abs();
    let convergence = ConvergenceCheck {
        splitting_rel_change: rel,
        converged: rel <= 0.01,
    };

    // both wells are degenerate to roundoff; anchor the localized states to
    // the theta = 0 well so psi_up sits where the reference equilibrium is.
    // The wells resolve each other only down to the rounding of the sampled
    // values, so the tie tolerance tracks the absolute potential scale.
    let v = resample_joule(pot, resolution);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vabs = vmax.abs().max(vmin.abs());
    let tol = 1e-6 * (vmax - vmin) + 32.0 * f64::EPSILON * vabs;
    let well = (0..resolution)
        .filter(|&i| v[i] <= vmin + tol)
        .min_by_key(|&i| i.min(resolution - i))
        .unwrap_or(0);
    for psi in states.iter_mut() {
        if psi[well] < 0.0 {
            psi.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let psi0 = states.swap_remove(0);
    let psi1 = states.swap_remove(0);
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    let psi_up: Vec<f64> = psi0
        .iter()
        .zip(&psi1)
        .map(|(a, b)| (a + b) * inv_sqrt2)
        .collect();
    let psi_down: Vec<f64> = psi0
        .iter()
        .zip(&psi1)
        .map(|(a, b)| (a - b) * inv_sqrt2)
        .collect();

    let period = pot.period();
    Ok(TunnelDoublet {
        e0,
        e1,
        splitting,
        rate_j: splitting_to_rate_j(splitting),
        rate_hz: splitting_to_rate_hz(splitting),
        theta_grid: (0..resolution)
            .map(|i| i as f64 * period / resolution as f64)
            .collect(),
        psi0,
        psi1,
        psi_up,
        psi_down,
        method,
        resolution,
        convergence,
    })
}

/// Full tunneling pipeline output: the relaxed-potential doublet is the
/// headline result, the rigid one is the cross-check.
#[derive(Debug, Clone)]
pub struct TunnelReport {
    pub relaxed: TunnelDoublet,
    pub rigid: TunnelDoublet,
    pub relaxed_potential: RotorPotential,
    pub rigid_potential: RotorPotential,
    pub equilibrium: IonConfiguration,
}

/// equilibrium -> relaxed effective potential -> plane-wave ring solve, at
/// the default grid of 256 potential samples and resolution 1024.
pub fn tunneling_rate(config: &TrapConfig) -> Result<TunnelReport> {
    tunneling_rate_with(config, 256, 1024)
}

pub fn tunneling_rate_with(
    config: &TrapConfig,
    grid_size: usize,
    resolution: usize,
) -> Result<TunnelReport> {
    let eq = find_equilibrium(config, &Seed::RingUp)?;
    let relaxed_potential =
        effective_potential_from(config, &eq, PotentialMethod::Relaxed, grid_size)?;
    if !relaxed_potential.is_two_well() {
        return Err(Error::NotTwoWell {
            minima: relaxed_potential.minima_count,
        });
    }
    let relaxed = solve_ring(&relaxed_potential, resolution, RingMethod::Fourier)?;
    let rigid_potential =
        effective_potential_from(config, &eq, PotentialMethod::Rigid, grid_size)?;
    let rigid = solve_ring(&rigid_potential, resolution, RingMethod::Fourier)?;
    Ok(TunnelReport {
        relaxed,
        rigid,
        relaxed_potential,
        rigid_potential,
        equilibrium: eq,
    })
}
