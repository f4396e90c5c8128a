//! Physical constants, trap configuration and unit system.
//!
//! All crystal coordinates are expressed in units of the characteristic
//! length `l = (e^2 / (4 pi eps0 m omega_z^2))^(1/3)` and energies in units
//! of `e^2 / (4 pi eps0 l)`, so the dimensionless potential depends only on
//! the ion count and the anisotropy ratio.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant (J s), CODATA 2018.
pub const HBAR: f64 = 1.054571817e-34;
/// Planck constant (J s).
pub const PLANCK: f64 = 2.0 * PI * HBAR;
/// Elementary charge (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Vacuum permittivity (F/m), CODATA 2018.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
/// Atomic mass unit (kg), CODATA 2018.
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;
/// Coulomb coupling e^2 / (4 pi eps0) in J m.
pub const COULOMB: f64 =
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY);
/// Flux quantum used for the AB phase, `phi_0 = hbar / e` (Wb).
///
/// This is the convention the simulator is contracted to; it differs from
/// the usual h/e quantum by 2 pi.
pub const FLUX_QUANTUM: f64 = HBAR / ELEMENTARY_CHARGE;
/// Mass of 171Yb+ (kg), 170.936 u.
pub const YB171_MASS: f64 = 170.936 * ATOMIC_MASS_UNIT;

/// Fixed CODATA constants bundled as a value type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub elementary_charge: f64,
    pub vacuum_permittivity: f64,
    pub atomic_mass_unit: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            elementary_charge: ELEMENTARY_CHARGE,
            vacuum_permittivity: VACUUM_PERMITTIVITY,
            atomic_mass_unit: ATOMIC_MASS_UNIT,
        }
    }
}

/// Planar trap scenario: ion count, axial frequency omega_z (rad/s),
/// anisotropy ratio omega_x / omega_z and ion mass (kg).
///
/// The y direction is frozen out (omega_y >> omega_x, omega_z) and not
/// represented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    pub n_ions: usize,
    pub omega_z: f64,
    pub anisotropy: f64,
    pub ion_mass: f64,
}

impl TrapConfig {
    /// Validating constructor. Requires at least two ions; single-ion
    /// configurations are permitted only through direct struct literals
    /// (degenerate test instances).
    pub fn new(n_ions: usize, omega_z: f64, anisotropy: f64, ion_mass: f64) -> Result<Self> {
        let cfg = Self {
            n_ions,
            omega_z,
            anisotropy,
            ion_mass,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// N ions of 171Yb+ at the given axial frequency in ordinary Hz.
    pub fn yb171(n_ions: usize, omega_z_hz: f64, anisotropy: f64) -> Result<Self> {
        Self::new(n_ions, 2.0 * PI * omega_z_hz, anisotropy, YB171_MASS)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 2 {
            return Err(Error::InvalidInput(format!(
                "n_ions must be >= 2, got {}",
                self.n_ions
            )));
        }
        if !(self.omega_z.is_finite() && self.omega_z > 0.0) {
            return Err(Error::InvalidInput(format!(
                "omega_z must be positive and finite, got {}",
                self.omega_z
            )));
        }
        if !(self.anisotropy.is_finite() && self.anisotropy > 0.0) {
            return Err(Error::InvalidInput(format!(
                "anisotropy must be positive and finite, got {}",
                self.anisotropy
            )));
        }
        if !(self.ion_mass.is_finite() && self.ion_mass > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ion_mass must be positive and finite, got {}",
                self.ion_mass
            )));
        }
        Ok(())
    }

    /// Same trap at a different anisotropy ratio.
    pub fn with_anisotropy(&self, anisotropy: f64) -> Self {
        Self {
            anisotropy,
            ..*self
        }
    }

    /// Characteristic length l = (e^2 / (4 pi eps0 m omega_z^2))^(1/3) in m.
    pub fn characteristic_length(&self) -> f64 {
        (COULOMB / (self.ion_mass * self.omega_z * self.omega_z)).cbrt()
    }

    /// Energy unit e^2 / (4 pi eps0 l) in J.
    pub fn energy_unit(&self) -> f64 {
        COULOMB / self.characteristic_length()
    }
}

/// Aharonov-Bohm hopping phase, stored reduced to [0, 2 pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABPhase {
    theta_ab: f64,
}

impl ABPhase {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::InvalidInput(format!(
                "AB phase must be finite, got {radians}"
            )));
        }
        let mut reduced = radians.rem_euclid(2.0 * PI);
        // rem_euclid rounds up to 2*pi itself for tiny negative arguments
        if reduced >= 2.0 * PI {
            reduced = 0.0;
        }
        Ok(Self { theta_ab: reduced })
    }

    pub const ZERO: ABPhase = ABPhase { theta_ab: 0.0 };

    pub fn radians(self) -> f64 {
        self.theta_ab
    }
}

/// AB phase from a magnetic flux (Wb): theta = pi * flux / (hbar / e),
/// reduced mod 2 pi.
pub fn flux_to_phase(flux: f64) -> Result<ABPhase> {
    if !flux.is_finite() {
        return Err(Error::InvalidInput(format!(
            "flux must be finite, got {flux}"
        )));
    }
    ABPhase::new(PI * flux / FLUX_QUANTUM)
}

/// Smallest non-negative flux producing the given phase.
pub fn phase_to_flux(phase: ABPhase) -> f64 {
    phase.radians() * FLUX_QUANTUM / PI
}
