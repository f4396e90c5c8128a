//! Effective rotational potential V(theta) on the reduced orientation ring.
//!
//! Identical ions make a rotation by 2 pi / N an identity, so the
//! orientation space is the ring [0, 2 pi / N). In the near-isotropic
//! regime the relaxed potential has two degenerate wells per period,
//! separated by pi / N.

use crate::crystal::{self, IonConfiguration, Seed};
use crate::error::{Error, Result};
use crate::phys::TrapConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialMethod {
    /// Rigid rotation of the equilibrium shape.
    Rigid,
    /// Energy minimized at each orientation over all shape coordinates
    /// orthogonal to the rotation generator.
    Relaxed,
}

impl std::fmt::Display for PotentialMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialMethod::Rigid => write!(f, "rigid"),
            PotentialMethod::Relaxed => write!(f, "relaxed"),
        }
    }
}

impl std::str::FromStr for PotentialMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rigid" => Ok(PotentialMethod::Rigid),
            "relaxed" => Ok(PotentialMethod::Relaxed),
            other => Err(Error::InvalidInput(format!(
                "unknown potential method '{other}'"
            ))),
        }
    }
}

/// Effective potential sampled on a uniform grid over one reduced period,
/// with the moment of inertia needed by the ring Schroedinger problem.
#[derive(Debug, Clone)]
pub struct RotorPotential {
    /// Uniform grid on [0, 2 pi / n_ions), radians.
    pub theta_grid: Vec<f64>,
    pub values_dimensionless: Vec<f64>,
    pub values_joule: Vec<f64>,
    /// Moment of inertia at the well equilibrium (kg m^2).
    pub inertia: f64,
    /// Moment of inertia of the (relaxed) shape at each grid angle; constant
    /// for the rigid method. Emitted so the fixed-inertia approximation can
    /// be bounded empirically.
    pub inertia_trace: Vec<f64>,
    /// max(V) - min(V) over the period (J).
    pub barrier: f64,
    pub method: PotentialMethod,
    pub n_ions: usize,
    /// Number of strict local minima per period (0 when the landscape is
    /// flat at the f64 noise floor). Two wells is the tunneling-rotor
    /// regime.
    pub minima_count: usize,
}

impl RotorPotential {
    /// Reduced-ring period 2 pi / N.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_ions as f64
    }

    pub fn is_two_well(&self) -> bool {
        self.minima_count == 2
    }

    /// Flat ring with V = 0 everywhere; test instrument for the analytic
    /// free-rotor spectrum.
    pub fn free_ring(n_ions: usize, grid_size: usize, inertia: f64) -> Self {
        let period = 2.0 * std::f64::consts::PI / n_ions as f64;
        let theta_grid = (0..grid_size)
            .map(|g| g as f64 * period / grid_size as f64)
            .collect();
        Self {
            theta_grid,
            values_dimensionless: vec![0.0; grid_size],
            values_joule: vec![0.0; grid_size],
            inertia,
            inertia_trace: vec![inertia; grid_size],
            barrier: 0.0,
            method: PotentialMethod::Rigid,
            n_ions,
            minima_count: 0,
        }
    }

    /// Same ring with the potential scaled by a factor (deep-well studies).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values_dimensionless.iter_mut().for_each(|v| *v *= factor);
        out.values_joule.iter_mut().for_each(|v| *v *= factor);
        out.barrier *= factor;
        out
    }
}

/// Moment of inertia I = m sum_i r_i^2 in SI units.
pub fn moment_of_inertia(config: &TrapConfig, equilibrium: &IonConfiguration) -> f64 {
    let l = config.characteristic_length();
    config.ion_mass * l * l * equilibrium.radius_squared_sum()
}

/// Barrier height max(V) - min(V) over the period (J).
pub fn barrier_height(potential: &RotorPotential) -> f64 {
    potential.barrier
}

/// Effective potential at a single orientation angle (dimensionless energy
/// and the shape it was evaluated at). Exposed unreduced so the C_N folding
/// property can be checked over the full circle.
pub fn potential_at_angle(
    config: &TrapConfig,
    equilibrium: &IonConfiguration,
    method: PotentialMethod,
    theta: f64,
) -> Result<(f64, IonConfiguration)> {
    let rotated = equilibrium.rotated(theta);
    match method {
        PotentialMethod::Rigid => {
            let v = crystal::potential_energy(config, &rotated)?;
            Ok((v, rotated))
        }
        PotentialMethod::Relaxed => crystal::relax_orthogonal(config, &rotated)
            .map_err(|grad_norm| Error::RelaxationFailure { theta, grad_norm }),
    }
}

/// Effective potential over one reduced period, from a freshly computed
/// ring-up equilibrium.
pub fn effective_potential(
    config: &TrapConfig,
    method: PotentialMethod,
    grid_size: usize,
) -> Result<RotorPotential> {
    let eq = crystal::find_equilibrium(config, &Seed::RingUp)?;
    effective_potential_from(config, &eq, method, grid_size)
}

/// Effective potential over one reduced period from a known equilibrium.
/// Grid angles are measured from the equilibrium orientation, so the well
/// sits at theta = 0 (and its partner at pi / N in the two-well regime).
pub fn effective_potential_from(
    config: &TrapConfig,
    equilibrium: &IonConfiguration,
    method: PotentialMethod,
    grid_size: usize,
) -> Result<RotorPotential> {
    if grid_size < 64 {
        return Err(Error::InvalidInput(format!(
            "grid_size must be >= 64, got {grid_size}"
        )));
    }
    if equilibrium.n_ions() != config.n_ions {
        return Err(Error::InvalidInput(format!(
            "equilibrium has {} ions, config expects {}",
            equilibrium.n_ions(),
            config.n_ions
        )));
    }
    let n = config.n_ions;
    let period = 2.0 * std::f64::consts::PI / n as f64;
    let e0 = config.energy_unit();
    let l = config.characteristic_length();
    let m_l2 = config.ion_mass * l * l;

    let theta_grid: Vec<f64> = (0..grid_size)
        .map(|g| g as f64 * period / grid_size as f64)
        .collect();
    let mut values = Vec::with_capacity(grid_size);
    let mut inertia_trace = Vec::with_capacity(grid_size);
    for &theta in &theta_grid {
        let (v, shape) = potential_at_angle(config, equilibrium, method, theta)?;
        values.push(v);
        inertia_trace.push(m_l2 * shape.radius_squared_sum());
    }

    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = vmax - vmin;
    let flat = range < 1e-13 * vmax.abs().max(1.0);
    let minima_count = if flat {
        0
    } else {
        (0..grid_size)
            .filter(|&i| {
                let prev = values[(i + grid_size - 1) % grid_size];
                let next = values[(i + 1) % grid_size];
                values[i] < prev && values[i] < next
            })
            .count()
    };

    Ok(RotorPotential {
        values_joule: values.iter().map(|v| v * e0).collect(),
        values_dimensionless: values,
        inertia: moment_of_inertia(config, equilibrium),
        inertia_trace,
        barrier: range * e0,
        method,
        n_ions: n,
        minima_count,
        theta_grid,
    })
}
