use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::mixing::FlavorMixer;
use crate::{Result, WalkError};

/// Numerical factor converting `Δm²[eV²] · L[km] / (2 E[GeV])` into radians.
pub const PHASE_UNIT_FACTOR: f64 = 5.08;

/// `P(ν_α → ν_β; t) = |Σ_i R_βi e^{−iE_i t} R*_αi|²`.
pub fn vacuum_transition_probability(
    mixer: &FlavorMixer,
    energies: &[f64],
    t: f64,
    alpha: usize,
    beta: usize,
) -> Result<f64> {
    let n = mixer.dimension();
    if energies.len() != n {
        return Err(WalkError::DimensionMismatch {
            what: "energy list",
            expected: n,
            found: energies.len(),
        });
    }
    if alpha >= n || beta >= n {
        return Err(WalkError::invalid(
            "flavor",
            format!("flavor index out of range for {n} flavors"),
        ));
    }
    let amplitude: Complex64 = energies
        .iter()
        .enumerate()
        .map(|(i, e)| {
            mixer.entry(beta, i) * Complex64::from_polar(1.0, -e * t) * mixer.entry(alpha, i).conj()
        })
        .sum();
    Ok(amplitude.norm_sqr())
}

/// Inputs of the linearized flavor Hamiltonian
/// `k + R diag(θ̄²) R† / (2k) + diag(ρ, 0, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub k: f64,
    pub masses: Vec<f64>,
    pub mixer: FlavorMixer,
    pub rho: f64,
}

impl EffectiveHamiltonian {
    pub fn new(k: f64, masses: Vec<f64>, mixer: FlavorMixer, rho: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(WalkError::invalid("k", "wavenumber must be positive"));
        }
        if masses.len() != mixer.dimension() {
            return Err(WalkError::DimensionMismatch {
                what: "mass list",
                expected: mixer.dimension(),
                found: masses.len(),
            });
        }
        Ok(EffectiveHamiltonian {
            k,
            masses,
            mixer,
            rho,
        })
    }

    /// `Δm² = θ̄₂² − θ̄₁²` (first two mass states).
    pub fn dm2(&self) -> f64 {
        self.masses[1].powi(2) - self.masses[0].powi(2)
    }

    /// `k ≥ 5 · max θ̄`.
    pub fn is_relativistic(&self) -> bool {
        let max_mass = self.masses.iter().map(|m| m.abs()).fold(0.0, f64::max);
        self.k >= 5.0 * max_mass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumEnergies {
    pub energies: Vec<f64>,
    /// False when `k < 5 · max θ̄`: the linearization is then unreliable.
    pub relativistic: bool,
}

/// `E_i ≈ k + θ̄_i² / (2k)`.
pub fn continuum_energies(h: &EffectiveHamiltonian) -> ContinuumEnergies {
    ContinuumEnergies {
        energies: h.masses.iter().map(|m| h.k + m * m / (2.0 * h.k)).collect(),
        relativistic: h.is_relativistic(),
    }
}

/// `φ(t) = (θ̄₂² − θ̄₁²) t / (2k)`.
pub fn continuum_phase(theta1: f64, theta2: f64, k: f64, t: f64) -> f64 {
    (theta2 * theta2 - theta1 * theta1) * t / (2.0 * k)
}

/// An oscillation experiment in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Δm² in eV².
    pub dm2: f64,
    /// Energy in GeV.
    pub energy: f64,
    /// Baseline in km.
    pub baseline: f64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy.is_finite() && self.energy > 0.0) {
            return Err(WalkError::invalid("energy", "must be positive"));
        }
        if !(self.baseline.is_finite() && self.baseline >= 0.0) {
            return Err(WalkError::invalid("baseline", "must be non-negative"));
        }
        if !self.dm2.is_finite() {
            return Err(WalkError::invalid("dm2", "must be finite"));
        }
        Ok(())
    }
}

/// `φ(L) = 5.08 · Δm² L / (2E)` with Δm² in eV², L in km, E in GeV.
pub fn physical_phase(spec: &ExperimentSpec) -> f64 {
    PHASE_UNIT_FACTOR * spec.dm2 * spec.baseline / (2.0 * spec.energy)
}
