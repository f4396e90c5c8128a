//! Tight-binding quantum dynamics of the rotor.
//!
//! Two sectors: the identical-spin two-level system (orientation up/down
//! with AB-phased clockwise and counter-clockwise rotation operators), and
//! the one-spin-flipped 2N-site cycle, where the flipped ion makes the N
//! rotational configurations of each orientation distinguishable. Hopping
//! carries the Peierls phase e^{i theta_AB} on n -> n+1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phys::{ABPhase, HBAR};

const NORM_TOL: f64 = 1e-12;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Superposition alpha |psi_up> + beta |psi_down>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl TwoLevelState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let s = Self { alpha, beta };
        if (s.norm_sq() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "two-level state not normalized: |alpha|^2+|beta|^2 = {}",
                s.norm_sq()
            )));
        }
        Ok(s)
    }

    pub fn psi_up() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn psi_down() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }
}

pub fn probability_up(state: &TwoLevelState) -> f64 {
    state.alpha.norm_sqr()
}

/// Evolve under H = hbar j (J_cl e^{i theta} + J_ccl e^{-i theta}) with both
/// rotation operators swapping up and down, i.e. H = 2 hbar j cos(theta)
/// sigma_x: exp(-i H t / hbar) = cos(phi) - i sin(phi) sigma_x with
/// phi = 2 j t cos(theta). Starting from |psi_up>, P_up(t) =
/// cos^2(2 j t cos theta); at cos(theta) = 0 the two rotation paths cancel
/// and the state never leaves |psi_up>.
pub fn evolve_two_level(
    state: &TwoLevelState,
    rate_j: f64,
    theta_ab: ABPhase,
    t: f64,
) -> Result<TwoLevelState> {
    if (state.norm_sq() - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidInput(
            "two-level state not normalized".into(),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "evolution time must be finite and >= 0, got {t}"
        )));
    }
    if !rate_j.is_finite() {
        return Err(Error::InvalidInput("rate_j must be finite".into()));
    }
    let phi = 2.0 * rate_j * t * theta_ab.radians().cos();
    let (s, c) = phi.sin_cos();
    let i = Complex64::new(0.0, 1.0);
    Ok(TwoLevelState {
        alpha: state.alpha * c - i * state.beta * s,
        beta: state.beta * c - i * state.alpha * s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceRow {
    /// Time in units of 1/j.
    pub t_normalized: f64,
    pub theta_ab: f64,
    pub p_up: f64,
}

/// P_up traces starting from |psi_up> for each AB phase, on a normalized
/// time grid (units of 1/j).
pub fn interference_scan(
    rate_j: f64,
    theta_list: &[ABPhase],
    t_grid: &[f64],
) -> Result<Vec<InterferenceRow>> {
    if !(rate_j.is_finite() && rate_j > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rate_j must be positive and finite, got {rate_j}"
        )));
    }
    let mut rows = Vec::with_capacity(theta_list.len() * t_grid.len());
    for &theta in theta_list {
        for &tn in t_grid {
            let state = evolve_two_level(&TwoLevelState::psi_up(), rate_j, theta, tn / rate_j)?;
            rows.push(InterferenceRow {
                t_normalized: tn,
                theta_ab: theta.radians(),
                p_up: probability_up(&state),
            });
        }
    }
    Ok(rows)
}

/// Single-excitation cycle state, gamma_n for sites n = 1..2N (odd sites are
/// up-orientation configurations, even sites down-orientation).
#[derive(Debug, Clone, PartialEq)]
pub struct CycleState {
    pub amplitudes: Vec<Complex64>,
}

impl CycleState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self { amplitudes };
        if (s.norm_sq() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "cycle state not normalized: sum |gamma|^2 = {}",
                s.norm_sq()
            )));
        }
        Ok(s)
    }

    /// Basis state localized at a 1-based site index.
    pub fn site_basis(size: usize, site: usize) -> Result<Self> {
        if site < 1 || site > size {
            return Err(Error::InvalidInput(format!(
                "site {site} out of range 1..={size}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
        amplitudes[site - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Peierls-phased nearest-neighbor cycle generator: as a matrix,
/// element (n+1, n) = hbar j e^{i theta_AB}, (n, n+1) = hbar j
/// e^{-i theta_AB}, cyclic with site 2N+1 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkHamiltonian {
    /// Number of sites, 2N.
    pub size: usize,
    /// Tunneling rate j (rad/s).
    pub rate_j: f64,
    pub theta_ab: ABPhase,
}

/// Cycle Hamiltonian for an N-ion rotor (2N sites). `n_ions = 1` is the
/// degenerate two-site instance, where both cyclic hops land on the same
/// matrix element and accumulate to the two-level coupling 2 hbar j cos.
pub fn build_cycle_hamiltonian(
    n_ions: usize,
    rate_j: f64,
    theta_ab: ABPhase,
) -> Result<WalkHamiltonian> {
    if n_ions < 1 {
        return Err(Error::InvalidInput("n_ions must be >= 1".into()));
    }
    if !(rate_j.is_finite() && rate_j > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rate_j must be positive and finite, got {rate_j}"
        )));
    }
    Ok(WalkHamiltonian {
        size: 2 * n_ions,
        rate_j,
        theta_ab,
    })
}

impl WalkHamiltonian {
    /// Dense matrix representation (J units).
    pub fn matrix(&self) -> nalgebra::DMatrix<Complex64> {
        let s = self.size;
        let hop = HBAR * self.rate_j;
        let phase = Complex64::from_polar(1.0, self.theta_ab.radians());
        let mut m = nalgebra::DMatrix::zeros(s, s);
        for n in 0..s {
            let np = (n + 1) % s;
            m[(np, n)] += hop * phase;
            m[(n, np)] += hop * phase.conj();
        }
        m
    }

    /// Closed-form circulant spectrum 2 hbar j cos(2 pi m / 2N - theta_AB),
    /// indexed by the Fourier mode m = 0..2N-1.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.size)
            .map(|m| {
                2.0 * HBAR
                    * self.rate_j
                    * (TWO_PI * m as f64 / self.size as f64 - self.theta_ab.radians()).cos()
            })
            .collect()
    }
}

/// exp(-i H t / hbar) applied through the circulant eigenbasis (discrete
/// Fourier modes); exact up to roundoff and norm preserving.
pub fn evolve_cycle(h: &WalkHamiltonian, state: &CycleState, t: f64) -> Result<CycleState> {
    if state.amplitudes.len() != h.size {
        return Err(Error::InvalidInput(format!(
            "state has {} amplitudes, Hamiltonian has {} sites",
            state.amplitudes.len(),
            h.size
        )));
    }
    if (state.norm_sq() - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidInput("cycle state not normalized".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidInput("evolution time must be finite".into()));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let s = h.size;
    let inv_sqrt = 1.0 / (s as f64).sqrt();
    let twiddle = |m: usize, n: usize| -> Complex64 {
        Complex64::from_polar(1.0, TWO_PI * ((m * n) % s) as f64 / s as f64)
    };
    // forward transform
    let mut modes = vec![Complex64::new(0.0, 0.0); s];
    for (m, mode) in modes.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, a) in state.amplitudes.iter().enumerate() {
            acc += a * twiddle(m, n).conj();
        }
        *mode = acc * inv_sqrt;
    }
    // phase evolution: eigenvalue of mode m is 2 hbar j cos(2 pi m / s - theta)
    for (m, mode) in modes.iter_mut().enumerate() {
        let lam_over_hbar =
            2.0 * h.rate_j * (TWO_PI * m as f64 / s as f64 - h.theta_ab.radians()).cos();
        *mode *= Complex64::from_polar(1.0, -lam_over_hbar * t);
    }
    // inverse transform
    let mut out = vec![Complex64::new(0.0, 0.0); s];
    for (n, amp) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, mode) in modes.iter().enumerate() {
            acc += mode * twiddle(m, n);
        }
        *amp = acc * inv_sqrt;
    }
    Ok(CycleState { amplitudes: out })
}

/// Site probability rows over a normalized time grid (units of 1/j).
#[derive(Debug, Clone)]
pub struct WalkTable {
    pub t_normalized: Vec<f64>,
    /// `probabilities[row][site-1]`, one row per grid time.
    pub probabilities: Vec<Vec<f64>>,
}

pub fn walk_distribution(
    h: &WalkHamiltonian,
    initial_site: usize,
    t_grid: &[f64],
) -> Result<WalkTable> {
    let start = CycleState::site_basis(h.size, initial_site)?;
    let mut probabilities = Vec::with_capacity(t_grid.len());
    for &tn in t_grid {
        let st = evolve_cycle(h, &start, tn / h.rate_j)?;
        probabilities.push(st.probabilities());
    }
    Ok(WalkTable {
        t_normalized: t_grid.to_vec(),
        probabilities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Up,
    Down,
}

/// Cycle-site label of a spin-up ion at rotational position n (1-based):
/// up -> 2n-1, down -> 2n.
pub fn spin_site_label(
    orientation: Orientation,
    position_index: usize,
    n_ions: usize,
) -> Result<usize> {
    if position_index < 1 || position_index > n_ions {
        return Err(Error::InvalidInput(format!(
            "position index {position_index} out of range 1..={n_ions}"
        )));
    }
    Ok(match orientation {
        Orientation::Up => 2 * position_index - 1,
        Orientation::Down => 2 * position_index,
    })
}

/// Inverse of `spin_site_label`.
pub fn site_label_inverse(site: usize, n_ions: usize) -> Result<(Orientation, usize)> {
    if site < 1 || site > 2 * n_ions {
        return Err(Error::InvalidInput(format!(
            "site {site} out of range 1..={}",
            2 * n_ions
        )));
    }
    if site % 2 == 1 {
        Ok((Orientation::Up, site.div_ceil(2)))
    } else {
        Ok((Orientation::Down, site / 2))
    }
}
