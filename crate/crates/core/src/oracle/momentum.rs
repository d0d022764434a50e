//! Exact evolution of a plane wave.
//!
//! On the periodic lattice a plane wave `e^{iκp}` is an eigenvector of the
//! shift, which then acts as `D(κ) = diag(e^{iκ}, e^{−iκ})` on each spin
//! pair. The whole step collapses to a `2n × 2n` matrix acting on the
//! (flavor ⊗ spin) spinor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::lattice::{CoinParameters, Spin};
use crate::mixing::FlavorMixer;
use crate::{Result, WalkError};

/// A plane wave with per-site wavenumber κ = kε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveSpec {
    pub kappa: f64,
    pub mode_index: Option<usize>,
}

impl PlaneWaveSpec {
    /// Ratio between κ and the largest coin angle required by [`Self::is_relativistic`].
    pub const RELATIVISTIC_RATIO: f64 = 5.0;

    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < std::f64::consts::PI) {
            return Err(WalkError::invalid(
                "kappa",
                format!("κ = {kappa} must lie in (0, π)"),
            ));
        }
        Ok(PlaneWaveSpec {
            kappa,
            mode_index: None,
        })
    }

    pub fn from_mode(n_sites: usize, mode_index: usize) -> Result<Self> {
        if mode_index >= n_sites {
            return Err(WalkError::ModeOutOfRange {
                mode: mode_index,
                n_sites,
            });
        }
        let mut spec = Self::new(crate::lattice::mode_wavenumber(n_sites, mode_index))?;
        spec.mode_index = Some(mode_index);
        Ok(spec)
    }

    /// `κ ≥ 5 · max_h |εθ_h|`.
    pub fn is_relativistic(&self, coins: &CoinParameters) -> bool {
        self.kappa >= Self::RELATIVISTIC_RATIO * coins.max_coin_angle()
    }
}

/// `V · R (⊕_h D(κ) Q_h) R†`, with `V` the electron-flavor phase `e^{iερ}`
/// for a uniform density.
pub fn momentum_step_matrix(
    kappa: f64,
    coins: &CoinParameters,
    mixer: &FlavorMixer,
    uniform_rho: Option<f64>,
) -> Result<DMatrix<Complex64>> {
    coins.validate()?;
    let n = coins.n_flavors();
    if mixer.dimension() != n {
        return Err(WalkError::DimensionMismatch {
            what: "mixer dimension",
            expected: n,
            found: mixer.dimension(),
        });
    }
    let forward = Complex64::from_polar(1.0, kappa);
    let backward = forward.conj();
    let mut block = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for h in 0..n {
        let q = crate::lattice::build_coin(coins.epsilon, coins.thetas[h]);
        for col in 0..2 {
            block[(2 * h, 2 * h + col)] = forward * q[(0, col)];
            block[(2 * h + 1, 2 * h + col)] = backward * q[(1, col)];
        }
    }
    let r = spin_lift(mixer);
    let mut step = &r * block * r.adjoint();
    if let Some(rho) = uniform_rho {
        let phase = Complex64::from_polar(1.0, coins.epsilon * rho);
        for col in 0..2 * n {
            step[(0, col)] *= phase;
            step[(1, col)] *= phase;
        }
    }
    Ok(step)
}

/// `R ⊗ I₂` in the (flavor ⊗ spin) ordering.
fn spin_lift(mixer: &FlavorMixer) -> DMatrix<Complex64> {
    let n = mixer.dimension();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i % 2 == j % 2 {
            mixer.entry(i / 2, j / 2)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Flavor probabilities of a plane wave started on `(flavor, spin)`,
/// recorded at steps `0..=steps`.
pub fn momentum_flavor_series(
    kappa: f64,
    coins: &CoinParameters,
    mixer: &FlavorMixer,
    uniform_rho: Option<f64>,
    flavor: usize,
    spin: Spin,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    let m = momentum_step_matrix(kappa, coins, mixer, uniform_rho)?;
    let n = coins.n_flavors();
    if flavor >= n {
        return Err(WalkError::invalid(
            "flavor",
            format!("flavor {flavor} out of range"),
        ));
    }
    let mut spinor = DVector::<Complex64>::zeros(2 * n);
    spinor[2 * flavor + spin.index()] = Complex64::new(1.0, 0.0);
    let probs = |v: &DVector<Complex64>| -> Vec<f64> {
        (0..n)
            .map(|h| v[2 * h].norm_sqr() + v[2 * h + 1].norm_sqr())
            .collect()
    };
    let mut series = Vec::with_capacity(steps + 1);
    series.push(probs(&spinor));
    for _ in 0..steps {
        spinor = &m * spinor;
        series.push(probs(&spinor));
    }
    Ok(series)
}

/// Eigenphase ω ∈ [0, π] of the single-flavor one-step operator `D(κ) Q`:
/// `cos ω = cos(εθ) · cos κ`.
pub fn lattice_dispersion(eps_theta: f64, kappa: f64) -> f64 {
    (eps_theta.cos() * kappa.cos()).clamp(-1.0, 1.0).acos()
}
