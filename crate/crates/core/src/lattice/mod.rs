//! Walker state and the one-step evolution of the flavor-mixed quantum walk.
//!
//! A step maps the flavor-basis state `Ψ̃` to `V · R (⊕_h S Q_h) R† Ψ̃`:
//! unmix into mass states, apply each mass state's coin `Q_h`, translate
//! ↑ one site left and ↓ one site right, remix, and finally multiply the
//! first (electron) flavor at site p by `e^{iερ_p}` when matter is present.
//! Boundaries are periodic.

mod kernel;
mod matter;
mod state;

pub use kernel::{
    build_coin, shift, step, step_mass_basis, Boundary, CoinParameters, StepOperatorSpec, Stepper,
};
pub use matter::MatterProfile;
pub use state::{
    flavor_probabilities, mode_wavenumber, plane_wave_state, Basis, LatticeState, Spin,
    CONSTRUCTION_NORM_TOLERANCE,
};
