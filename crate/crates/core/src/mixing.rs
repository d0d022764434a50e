//! Flavor-mixing unitaries.
//!
//! Flavor amplitudes are obtained from mass amplitudes as
//! `flavor[α] = Σ_i R[α][i] · mass[i]`. Two flavors use a plain rotation;
//! three flavors use the CP-conserving PMNS matrix written as a product of
//! three Gell-Mann exponentials, each of which is a plane rotation and is
//! evaluated in closed form.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::Serialize;

use crate::{Result, WalkError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mixing angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MixingAngles {
    TwoFlavor { phi12: f64 },
    ThreeFlavor { e_mu: f64, e_tau: f64, mu_tau: f64 },
}

impl MixingAngles {
    pub fn n_flavors(&self) -> usize {
        match self {
            MixingAngles::TwoFlavor { .. } => 2,
            MixingAngles::ThreeFlavor { .. } => 3,
        }
    }

    fn check_finite(&self) -> Result<()> {
        let finite = match *self {
            MixingAngles::TwoFlavor { phi12 } => phi12.is_finite(),
            MixingAngles::ThreeFlavor {
                e_mu,
                e_tau,
                mu_tau,
            } => e_mu.is_finite() && e_tau.is_finite() && mu_tau.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(WalkError::invalid("angles", "mixing angles must be finite"))
        }
    }
}

/// An `n × n` flavor-mixing unitary together with the angles that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlavorMixer {
    matrix: DMatrix<Complex64>,
    angles: MixingAngles,
}

impl FlavorMixer {
    pub fn from_angles(angles: &MixingAngles) -> Result<Self> {
        angles.check_finite()?;
        Ok(match *angles {
            MixingAngles::TwoFlavor { phi12 } => rotation_2flavor(phi12),
            MixingAngles::ThreeFlavor {
                e_mu,
                e_tau,
                mu_tau,
            } => pmns(e_mu, e_tau, mu_tau),
        })
    }

    /// No mixing: flavor and mass bases coincide.
    pub fn identity(n_flavors: usize) -> Result<Self> {
        match n_flavors {
            2 => Ok(rotation_2flavor(0.0)),
            3 => Ok(pmns(0.0, 0.0, 0.0)),
            n => Err(WalkError::invalid(
                "n_flavors",
                format!("only 2 or 3 flavors are supported, got {n}"),
            )),
        }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn angles(&self) -> &MixingAngles {
        &self.angles
    }

    /// Entry `R[row][col]`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> DMatrix<Complex64> {
        self.matrix.adjoint()
    }

    /// Largest entry of `|R R† − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dimension();
        let product = &self.matrix * self.matrix.adjoint();
        (product - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `[[cos φ, sin φ], [−sin φ, cos φ]]`.
pub fn rotation_2flavor(phi: f64) -> FlavorMixer {
    let (s, c) = phi.sin_cos();
    let matrix = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(c, 0.0),
        ],
    );
    FlavorMixer {
        matrix,
        angles: MixingAngles::TwoFlavor { phi12: phi },
    }
}

/// The three Gell-Mann matrices that generate real rotations: λ₂ (1-2
/// block), λ₅ (1-3 block) and λ₇ (2-3 block).
pub fn gell_mann(index: usize) -> Result<Matrix3<Complex64>> {
    let (a, b) = generator_block(index)?;
    let mut m = Matrix3::from_element(ZERO);
    m[(a, b)] = -I;
    m[(b, a)] = I;
    Ok(m)
}

fn generator_block(index: usize) -> Result<(usize, usize)> {
    match index {
        2 => Ok((0, 1)),
        5 => Ok((0, 2)),
        7 => Ok((1, 2)),
        other => Err(WalkError::UnsupportedGellMann(other)),
    }
}

/// `exp(iφλ)` for λ ∈ {λ₂, λ₅, λ₇}.
///
/// These generators satisfy λ³ = λ, so the series collapses to
/// `I + iλ sin φ + λ² (cos φ − 1)`.
pub fn gell_mann_exp(index: usize, phi: f64) -> Result<Matrix3<Complex64>> {
    let lambda = gell_mann(index)?;
    let (s, c) = phi.sin_cos();
    Ok(Matrix3::identity() + lambda * (I * s) + lambda * lambda * Complex64::new(c - 1.0, 0.0))
}

/// Real PMNS matrix `exp(iφ_μτ λ₇) · exp(iφ_eτ λ₅) · exp(iφ_eμ λ₂)`.
pub fn pmns(e_mu: f64, e_tau: f64, mu_tau: f64) -> FlavorMixer {
    let r = gell_mann_exp(7, mu_tau).expect("λ7 is supported")
        * gell_mann_exp(5, e_tau).expect("λ5 is supported")
        * gell_mann_exp(2, e_mu).expect("λ2 is supported");
    // The product of real rotations: drop the (exactly zero) imaginary parts.
    let matrix = DMatrix::from_fn(3, 3, |i, j| Complex64::new(r[(i, j)].re, 0.0));
    FlavorMixer {
        matrix,
        angles: MixingAngles::ThreeFlavor {
            e_mu,
            e_tau,
            mu_tau,
        },
    }
}
