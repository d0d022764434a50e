use thiserror::Error;

use crate::lattice::Basis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mode index {mode} out of range for a lattice of {n_sites} sites")]
    ModeOutOfRange { mode: usize, n_sites: usize },

    #[error("state is expressed in the {found:?} basis, expected {expected:?}")]
    WrongBasis { expected: Basis, found: Basis },

    #[error("Gell-Mann index {0} is not supported (only 2, 5 and 7)")]
    UnsupportedGellMann(usize),

    #[error("matter mixing angle is undefined: vacuum angle {phi} has no mixing at the resonance density")]
    DegenerateResonance { phi: f64 },
}

impl WalkError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        WalkError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
