//! Closed-form and momentum-space ground truth for the lattice walk.

mod momentum;
mod msw;
mod vacuum;

pub use momentum::{
    lattice_dispersion, momentum_flavor_series, momentum_step_matrix, PlaneWaveSpec,
};
pub use msw::{
    adiabaticity, asymptotic_transition, crossing_probability, matter_angle_gradient,
    matter_eigenvalues, matter_mixing_angle, msw_point, resonance_density, MswPoint,
};
pub use vacuum::{
    continuum_energies, continuum_phase, physical_phase, vacuum_transition_probability,
    ContinuumEnergies, EffectiveHamiltonian, ExperimentSpec, PHASE_UNIT_FACTOR,
};
