//! Multi-flavor discrete-time quantum walks as simulators of neutrino
//! flavor oscillations.
//!
//! The crate is split into four layers:
//!
//! - [`lattice`]: the walker state on a periodic 1D lattice and the
//!   flavor-mixed, optionally matter-coupled, one-step evolution.
//! - [`mixing`]: two-flavor rotations and the real PMNS matrix built from
//!   Gell-Mann exponentials.
//! - [`oracle`]: closed-form and momentum-space results used as ground truth
//!   for the lattice (vacuum probabilities, dispersion, MSW formulas).
//! - [`scenarios`]: JSON-configured runs producing probability time series,
//!   used by the `nu-walk` binary.

pub mod error;
pub mod lattice;
pub mod mixing;
pub mod oracle;
pub mod scenarios;

pub use error::WalkError;
pub use lattice::{
    build_coin, flavor_probabilities, plane_wave_state, shift, step, Basis, Boundary,
    CoinParameters, LatticeState, MatterProfile, Spin, StepOperatorSpec, Stepper,
};
pub use mixing::{gell_mann, pmns, rotation_2flavor, FlavorMixer, MixingAngles};

pub type Result<T, E = WalkError> = std::result::Result<T, E>;
