use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::mixing::FlavorMixer;
use crate::{Result, WalkError};

/// Tolerance on `|‖ψ‖² − 1|` when a state is constructed.
pub const CONSTRUCTION_NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Which basis the flavor index of a [`LatticeState`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Mass,
    Flavor,
}

/// Walker wavefunction on a periodic lattice.
///
/// Amplitudes are stored site-major: for each site, flavors in order, and
/// for each flavor the (↑, ↓) spin pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    n_sites: usize,
    n_flavors: usize,
    amplitudes: Vec<Complex64>,
    basis: Basis,
}

fn check_shape(n_sites: usize, n_flavors: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(WalkError::invalid(
            "n_sites",
            format!("the lattice needs at least 2 sites, got {n_sites}"),
        ));
    }
    if !(2..=3).contains(&n_flavors) {
        return Err(WalkError::invalid(
            "n_flavors",
            format!("only 2 or 3 flavors are supported, got {n_flavors}"),
        ));
    }
    Ok(())
}

fn check_flavor(flavor: usize, n_flavors: usize) -> Result<()> {
    if flavor >= n_flavors {
        return Err(WalkError::invalid(
            "flavor",
            format!("flavor index {flavor} out of range for {n_flavors} flavors"),
        ));
    }
    Ok(())
}

impl LatticeState {
    /// Wraps raw amplitudes, checking the layout and the normalization.
    pub fn from_amplitudes(
        n_sites: usize,
        n_flavors: usize,
        amplitudes: Vec<Complex64>,
        basis: Basis,
    ) -> Result<Self> {
        check_shape(n_sites, n_flavors)?;
        let expected = n_sites * n_flavors * 2;
        if amplitudes.len() != expected {
            return Err(WalkError::DimensionMismatch {
                what: "amplitude array",
                expected,
                found: amplitudes.len(),
            });
        }
        let state = LatticeState {
            n_sites,
            n_flavors,
            amplitudes,
            basis,
        };
        let norm = state.norm_sqr();
        if norm.is_nan() || (norm - 1.0).abs() > CONSTRUCTION_NORM_TOLERANCE {
            return Err(WalkError::invalid(
                "amplitudes",
                format!("state is not normalized (‖ψ‖² = {norm})"),
            ));
        }
        Ok(state)
    }

    /// A single unit amplitude at `(site, flavor, spin)`.
    pub fn localized(
        n_sites: usize,
        n_flavors: usize,
        site: usize,
        flavor: usize,
        spin: Spin,
        basis: Basis,
    ) -> Result<Self> {
        check_shape(n_sites, n_flavors)?;
        check_flavor(flavor, n_flavors)?;
        if site >= n_sites {
            return Err(WalkError::invalid(
                "site",
                format!("site {site} out of range for {n_sites} sites"),
            ));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites * n_flavors * 2];
        amplitudes[Self::offset(n_flavors, site, flavor, spin)] = Complex64::new(1.0, 0.0);
        Ok(LatticeState {
            n_sites,
            n_flavors,
            amplitudes,
            basis,
        })
    }

    /// Gaussian packet `exp(−(p − center)²/(4w²)) · exp(iκp)` with
    /// κ = 2π·mode/n_sites, wrapped onto the periodic lattice and normalized.
    ///
    /// `width` is the standard deviation `w` of the site distribution
    /// `|ψ_p|²`, in sites.
    pub fn wave_packet(
        n_sites: usize,
        n_flavors: usize,
        mode_index: usize,
        center: f64,
        width: f64,
        flavor: usize,
        spin: Spin,
    ) -> Result<Self> {
        check_shape(n_sites, n_flavors)?;
        check_flavor(flavor, n_flavors)?;
        if mode_index >= n_sites {
            return Err(WalkError::ModeOutOfRange {
                mode: mode_index,
                n_sites,
            });
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(WalkError::invalid("width", "packet width must be positive"));
        }
        if !(center.is_finite() && (0.0..n_sites as f64).contains(&center)) {
            return Err(WalkError::invalid(
                "center",
                format!("packet center must lie in [0, {n_sites})"),
            ));
        }
        let kappa = mode_wavenumber(n_sites, mode_index);
        let n = n_sites as f64;
        let envelope: Vec<f64> = (0..n_sites)
            .map(|p| {
                // Minimum-image distance on the ring.
                let mut d = p as f64 - center;
                d -= n * (d / n).round();
                (-d * d / (4.0 * width * width)).exp()
            })
            .collect();
        let norm = envelope.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites * n_flavors * 2];
        for (p, a) in envelope.iter().enumerate() {
            amplitudes[Self::offset(n_flavors, p, flavor, spin)] =
                Complex64::from_polar(a / norm, kappa * p as f64);
        }
        LatticeState::from_amplitudes(n_sites, n_flavors, amplitudes, Basis::Flavor)
    }

    #[inline]
    pub(crate) fn offset(n_flavors: usize, site: usize, flavor: usize, spin: Spin) -> usize {
        (site * n_flavors + flavor) * 2 + spin.index()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_flavors(&self) -> usize {
        self.n_flavors
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, site: usize, flavor: usize, spin: Spin) -> Complex64 {
        self.amplitudes[Self::offset(self.n_flavors, site, flavor, spin)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability of each flavor (or mass state, in the mass basis),
    /// summed over sites and spins.
    pub fn flavor_probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.n_flavors];
        for site in self.amplitudes.chunks_exact(2 * self.n_flavors) {
            for (h, pair) in site.chunks_exact(2).enumerate() {
                probs[h] += pair[0].norm_sqr() + pair[1].norm_sqr();
            }
        }
        probs
    }

    /// Re-expresses the state in `target` using `Ψ̃ = R Ψ` (mass → flavor)
    /// or `Ψ = R† Ψ̃` (flavor → mass).
    pub fn to_basis(&self, mixer: &FlavorMixer, target: Basis) -> Result<Self> {
        if mixer.dimension() != self.n_flavors {
            return Err(WalkError::DimensionMismatch {
                what: "mixer dimension",
                expected: self.n_flavors,
                found: mixer.dimension(),
            });
        }
        if target == self.basis {
            return Ok(self.clone());
        }
        let n = self.n_flavors;
        let m = match target {
            Basis::Flavor => mixer.matrix().clone(),
            Basis::Mass => mixer.adjoint(),
        };
        let mut out = self.clone();
        out.basis = target;
        for (src, dst) in self
            .amplitudes
            .chunks_exact(2 * n)
            .zip(out.amplitudes.chunks_exact_mut(2 * n))
        {
            for s in 0..2 {
                for a in 0..n {
                    dst[2 * a + s] = (0..n).map(|b| m[(a, b)] * src[2 * b + s]).sum();
                }
            }
        }
        Ok(out)
    }
}

/// Per-site wavenumber `κ = 2π·mode/n_sites`.
pub fn mode_wavenumber(n_sites: usize, mode_index: usize) -> f64 {
    2.0 * std::f64::consts::PI * mode_index as f64 / n_sites as f64
}

/// Plane wave `e^{iκp}/√n_sites` on a single flavor and spin component,
/// expressed in the flavor basis.
pub fn plane_wave_state(
    n_sites: usize,
    n_flavors: usize,
    mode_index: usize,
    flavor: usize,
    spin: Spin,
) -> Result<LatticeState> {
    check_shape(n_sites, n_flavors)?;
    check_flavor(flavor, n_flavors)?;
    if mode_index >= n_sites {
        return Err(WalkError::ModeOutOfRange {
            mode: mode_index,
            n_sites,
        });
    }
    let amplitude = 1.0 / (n_sites as f64).sqrt();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites * n_flavors * 2];
    for p in 0..n_sites {
        // Reduce the phase index mod n_sites so the phase stays exact on long rings.
        let phase = mode_wavenumber(n_sites, (mode_index * p) % n_sites);
        amplitudes[LatticeState::offset(n_flavors, p, flavor, spin)] =
            Complex64::from_polar(amplitude, phase);
    }
    LatticeState::from_amplitudes(n_sites, n_flavors, amplitudes, Basis::Flavor)
}

pub fn flavor_probabilities(state: &LatticeState) -> Vec<f64> {
    state.flavor_probabilities()
}
