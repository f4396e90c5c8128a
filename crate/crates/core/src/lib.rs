//! Simulator for planar trapped-ion crystals near the isotropy point:
//! Wigner-crystal equilibria and normal modes, the effective rotational
//! potential and its tunneling doublet, and tight-binding quantum dynamics
//! on the associated 2N-site cycle with Aharonov-Bohm hopping phases.

pub mod crystal;
pub mod error;
mod minimize;
pub mod phys;
pub mod rotor;
pub mod tunnel;
pub mod walk;

pub use crystal::{
    adiabaticity, find_equilibrium, gradient, hessian, normal_modes, potential_energy,
    scan_modes, AdiabaticityTrace, IonConfiguration, ModeLabel, ModeScan, ModeSpectrum,
    RampSample, Seed,
};
pub use error::{Error, Result};
pub use phys::{flux_to_phase, phase_to_flux, ABPhase, PhysicalConstants, TrapConfig};
pub use rotor::{
    barrier_height, effective_potential, effective_potential_from, moment_of_inertia,
    potential_at_angle, PotentialMethod, RotorPotential,
};
pub use tunnel::{
    ring_eigenvalues, solve_ring, tunneling_rate, tunneling_rate_with, RingMethod,
    TunnelDoublet, TunnelReport,
};
pub use walk::{
    build_cycle_hamiltonian, evolve_cycle, evolve_two_level, interference_scan,
    probability_up, site_label_inverse, spin_site_label, walk_distribution, CycleState,
    Orientation, TwoLevelState, WalkHamiltonian, WalkTable,
};
