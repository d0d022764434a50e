use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matter::MatterProfile;
use super::state::{Basis, LatticeState};
use crate::mixing::FlavorMixer;
use crate::{Result, WalkError};

const MAX_FLAVORS: usize = 3;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Lattice step ε and per-flavor (per mass eigenstate) coin angles θ_h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinParameters {
    pub epsilon: f64,
    pub thetas: Vec<f64>,
}

impl CoinParameters {
    pub fn new(epsilon: f64, thetas: Vec<f64>) -> Result<Self> {
        let coins = CoinParameters { epsilon, thetas };
        coins.validate()?;
        Ok(coins)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(WalkError::invalid(
                "epsilon",
                "must be a positive finite number",
            ));
        }
        if !(2..=MAX_FLAVORS).contains(&self.thetas.len()) {
            return Err(WalkError::invalid(
                "thetas",
                format!("expected 2 or 3 coin angles, got {}", self.thetas.len()),
            ));
        }
        for &theta in &self.thetas {
            let angle = self.epsilon * theta;
            if !(angle.is_finite() && angle.abs() < FRAC_PI_2) {
                return Err(WalkError::invalid(
                    "thetas",
                    format!("coin angle ε·θ = {angle} must lie in (−π/2, π/2)"),
                ));
            }
        }
        Ok(())
    }

    pub fn n_flavors(&self) -> usize {
        self.thetas.len()
    }

    /// Per-step coin angle `ε·θ_h`.
    pub fn coin_angle(&self, flavor: usize) -> f64 {
        self.epsilon * self.thetas[flavor]
    }

    pub fn max_coin_angle(&self) -> f64 {
        (0..self.n_flavors())
            .map(|h| self.coin_angle(h).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Everything that defines one step `V · R (⊕_h S Q_h) R†`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOperatorSpec {
    pub coins: CoinParameters,
    pub mixer: FlavorMixer,
    pub matter: Option<MatterProfile>,
    pub boundary: Boundary,
}

impl StepOperatorSpec {
    pub fn vacuum(coins: CoinParameters, mixer: FlavorMixer) -> Self {
        StepOperatorSpec {
            coins,
            mixer,
            matter: None,
            boundary: Boundary::Periodic,
        }
    }

    pub fn with_matter(mut self, profile: MatterProfile) -> Self {
        self.matter = Some(profile);
        self
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        self.coins.validate()?;
        if self.mixer.dimension() != self.coins.n_flavors() {
            return Err(WalkError::DimensionMismatch {
                what: "mixer dimension",
                expected: self.coins.n_flavors(),
                found: self.mixer.dimension(),
            });
        }
        if let Some(profile) = &self.matter {
            profile.validate(n_sites)?;
        }
        Ok(())
    }
}

/// The coin `[[cos εθ, i sin εθ], [i sin εθ, cos εθ]]`.
pub fn build_coin(epsilon: f64, theta: f64) -> Matrix2<Complex64> {
    let (s, c) = (epsilon * theta).sin_cos();
    let c = Complex64::new(c, 0.0);
    let is = Complex64::new(0.0, s);
    Matrix2::new(c, is, is, c)
}

/// Spin-dependent translation: ↑ at site p takes the old ↑ amplitude of
/// p+1, ↓ at p takes the old ↓ amplitude of p−1 (periodic).
pub fn shift(state: &LatticeState) -> LatticeState {
    let n_sites = state.n_sites();
    let n = state.n_flavors();
    let src = state.amplitudes();
    let mut out = state.clone();
    for (p, dst) in out.amplitudes_mut().chunks_exact_mut(2 * n).enumerate() {
        let up = (p + 1) % n_sites;
        let down = (p + n_sites - 1) % n_sites;
        for h in 0..n {
            dst[2 * h] = src[(up * n + h) * 2];
            dst[2 * h + 1] = src[(down * n + h) * 2 + 1];
        }
    }
    out
}

/// Applies one step of the flavor-mixed walk to a flavor-basis state.
pub fn step(state: &LatticeState, spec: &StepOperatorSpec) -> Result<LatticeState> {
    let mut stepper = Stepper::new(spec, state.n_sites())?;
    let mut next = state.clone();
    stepper.advance(&mut next)?;
    Ok(next)
}

/// Applies `⊕_h S Q_h` to a mass-basis state (no mixing, no matter).
pub fn step_mass_basis(state: &LatticeState, coins: &CoinParameters) -> Result<LatticeState> {
    let mut stepper = Stepper::unmixed(coins, state.n_sites())?;
    let mut next = state.clone();
    stepper.advance(&mut next)?;
    Ok(next)
}

/// Precomputed one-step operator with its own scratch buffer.
///
/// Sites are processed in independent chunks (in parallel when there is
/// more than one chunk). Every output amplitude is computed by the same
/// sequence of operations whatever the chunking, so results are bitwise
/// identical for any chunk size.
#[derive(Debug, Clone)]
pub struct Stepper {
    n_sites: usize,
    n_flavors: usize,
    basis: Basis,
    coins: Vec<[Complex64; 2]>,
    /// `(R, R†)` row-major, absent for the block (mass basis) walk.
    mixing: Option<(Vec<Complex64>, Vec<Complex64>)>,
    /// `e^{iερ_p}` per site on the first flavor.
    phases: Option<Vec<Complex64>>,
    scratch: Vec<Complex64>,
    chunk_sites: usize,
}

impl Stepper {
    pub const DEFAULT_CHUNK_SITES: usize = 512;

    pub fn new(spec: &StepOperatorSpec, n_sites: usize) -> Result<Self> {
        spec.validate(n_sites)?;
        let n = spec.coins.n_flavors();
        let r = spec.mixer.matrix();
        let flat = |m: &nalgebra::DMatrix<Complex64>| -> Vec<Complex64> {
            (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .map(|(a, b)| m[(a, b)])
                .collect()
        };
        let mixing = Some((flat(r), flat(&r.adjoint())));
        let phases = match &spec.matter {
            Some(profile) => {
                let eps = spec.coins.epsilon;
                let rho = profile.densities(n_sites, eps)?;
                Some(
                    rho.iter()
                        .map(|r| Complex64::from_polar(1.0, eps * r))
                        .collect(),
                )
            }
            None => None,
        };
        Ok(Self::build(
            n_sites,
            &spec.coins,
            Basis::Flavor,
            mixing,
            phases,
        ))
    }

    pub fn unmixed(coins: &CoinParameters, n_sites: usize) -> Result<Self> {
        coins.validate()?;
        if n_sites < 2 {
            return Err(WalkError::invalid(
                "n_sites",
                "the lattice needs at least 2 sites",
            ));
        }
        Ok(Self::build(n_sites, coins, Basis::Mass, None, None))
    }

    fn build(
        n_sites: usize,
        coins: &CoinParameters,
        basis: Basis,
        mixing: Option<(Vec<Complex64>, Vec<Complex64>)>,
        phases: Option<Vec<Complex64>>,
    ) -> Self {
        let n_flavors = coins.n_flavors();
        let coins = (0..n_flavors)
            .map(|h| {
                let (s, c) = coins.coin_angle(h).sin_cos();
                [Complex64::new(c, 0.0), Complex64::new(0.0, s)]
            })
            .collect();
        Stepper {
            n_sites,
            n_flavors,
            basis,
            coins,
            mixing,
            phases,
            scratch: vec![ZERO; n_sites * n_flavors * 2],
            chunk_sites: Self::DEFAULT_CHUNK_SITES,
        }
    }

    /// Sets how many sites make up one unit of parallel work.
    pub fn with_chunk_sites(mut self, chunk_sites: usize) -> Self {
        self.chunk_sites = chunk_sites.max(1);
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_flavors(&self) -> usize {
        self.n_flavors
    }

    /// Advances `state` by one step in place.
    pub fn advance(&mut self, state: &mut LatticeState) -> Result<()> {
        if state.n_sites() != self.n_sites {
            return Err(WalkError::DimensionMismatch {
                what: "number of sites",
                expected: self.n_sites,
                found: state.n_sites(),
            });
        }
        if state.n_flavors() != self.n_flavors {
            return Err(WalkError::DimensionMismatch {
                what: "number of flavors",
                expected: self.n_flavors,
                found: state.n_flavors(),
            });
        }
        if state.basis() != self.basis {
            return Err(WalkError::WrongBasis {
                expected: self.basis,
                found: state.basis(),
            });
        }

        let n = self.n_flavors;
        let stride = 2 * n;
        let chunk = self.chunk_sites.saturating_mul(stride);
        let parallel = self.n_sites > self.chunk_sites;

        // Stage 1: into the mass basis, then the coin, site by site.
        self.scratch.copy_from_slice(state.amplitudes());
        let unmix = self.mixing.as_ref().map(|(_, adj)| adj.as_slice());
        let coins = &self.coins;
        let coin_sites = |block: &mut [Complex64]| {
            for site in block.chunks_exact_mut(stride) {
                if let Some(adj) = unmix {
                    mix_site(adj, n, site);
                }
                for (h, [c, is]) in coins.iter().enumerate() {
                    let (up, down) = (site[2 * h], site[2 * h + 1]);
                    site[2 * h] = c * up + is * down;
                    site[2 * h + 1] = is * up + c * down;
                }
            }
        };
        if parallel {
            self.scratch.par_chunks_mut(chunk).for_each(coin_sites);
        } else {
            coin_sites(&mut self.scratch);
        }

        // Stage 2: shift, back to the flavor basis, matter phase.
        let src = &self.scratch;
        let n_sites = self.n_sites;
        let remix = self.mixing.as_ref().map(|(r, _)| r.as_slice());
        let phases = self.phases.as_deref();
        let chunk_sites = self.chunk_sites;
        let shift_sites = |(index, block): (usize, &mut [Complex64])| {
            let first = index * chunk_sites;
            for (offset, site) in block.chunks_exact_mut(stride).enumerate() {
                let p = first + offset;
                let up = (p + 1) % n_sites;
                let down = (p + n_sites - 1) % n_sites;
                for h in 0..n {
                    site[2 * h] = src[up * stride + 2 * h];
                    site[2 * h + 1] = src[down * stride + 2 * h + 1];
                }
                if let Some(r) = remix {
                    mix_site(r, n, site);
                }
                if let Some(phases) = phases {
                    site[0] *= phases[p];
                    site[1] *= phases[p];
                }
            }
        };
        let amplitudes = state.amplitudes_mut();
        if parallel {
            amplitudes
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(shift_sites);
        } else {
            shift_sites((0, amplitudes));
        }
        Ok(())
    }
}

/// `site[a, s] ← Σ_b m[a][b] · site[b, s]` for both spins.
#[inline]
fn mix_site(m: &[Complex64], n: usize, site: &mut [Complex64]) {
    let mut tmp = [ZERO; 2 * MAX_FLAVORS];
    tmp[..2 * n].copy_from_slice(site);
    for a in 0..n {
        let row = &m[a * n..(a + 1) * n];
        let mut up = ZERO;
        let mut down = ZERO;
        for (b, coef) in row.iter().enumerate() {
            up += coef * tmp[2 * b];
            down += coef * tmp[2 * b + 1];
        }
        site[2 * a] = up;
        site[2 * a + 1] = down;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::state::{mode_wavenumber, plane_wave_state, Spin};
    use crate::mixing::rotation_2flavor;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn coin_examples() {
        let q = build_coin(0.5, 0.0);
        assert_eq!(q, Matrix2::identity());

        let q = build_coin(1.0, FRAC_PI_2);
        let i = Complex64::new(0.0, 1.0);
        assert!(close(q[(0, 0)], ZERO, 1e-16));
        assert!(close(q[(0, 1)], i, 1e-16));
        assert!(close(q[(1, 0)], i, 1e-16));

        let q = build_coin(1.0, 0.2);
        assert!((q[(0, 0)].re - 0.98007).abs() < 5e-6);
        assert!((q[(0, 1)].im - 0.19867).abs() < 5e-6);
        let defect = (q * q.adjoint() - Matrix2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(defect < 1e-15);
    }

    #[test]
    fn shift_moves_up_left_and_down_right() {
        let s = LatticeState::localized(8, 2, 3, 0, Spin::Up, Basis::Flavor).unwrap();
        let t = shift(&s);
        assert_eq!(t.amplitude(2, 0, Spin::Up), Complex64::new(1.0, 0.0));
        assert_eq!(t.norm_sqr(), 1.0);

        let s = LatticeState::localized(8, 2, 0, 1, Spin::Down, Basis::Flavor).unwrap();
        let t = shift(&s);
        assert_eq!(t.amplitude(1, 1, Spin::Down), Complex64::new(1.0, 0.0));

        let s = LatticeState::localized(8, 2, 0, 0, Spin::Up, Basis::Flavor).unwrap();
        assert_eq!(
            shift(&s).amplitude(7, 0, Spin::Up),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn plane_wave_is_shift_eigenvector() {
        let (n_sites, mode) = (8, 1);
        let kappa = mode_wavenumber(n_sites, mode);
        for spin in [Spin::Up, Spin::Down] {
            let s = plane_wave_state(n_sites, 2, mode, 0, spin).unwrap();
            let t = shift(&s);
            let sign = if spin == Spin::Up { 1.0 } else { -1.0 };
            let phase = Complex64::from_polar(1.0, sign * kappa);
            for p in 0..n_sites {
                assert!(close(
                    t.amplitude(p, 0, spin),
                    phase * s.amplitude(p, 0, spin),
                    1e-15
                ));
            }
        }
    }

    #[test]
    fn zero_coin_angles_reduce_to_shift() {
        let coins = CoinParameters::new(1.0, vec![0.0, 0.0]).unwrap();
        let spec = StepOperatorSpec::vacuum(coins, rotation_2flavor(0.6));
        let s = LatticeState::wave_packet(32, 2, 3, 12.0, 3.0, 0, Spin::Up).unwrap();
        let stepped = step(&s, &spec).unwrap();
        let shifted = shift(&s);
        for (a, b) in stepped.amplitudes().iter().zip(shifted.amplitudes()) {
            assert!(close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn unmixed_flavors_keep_their_probabilities() {
        let coins = CoinParameters::new(0.5, vec![0.1, 0.3]).unwrap();
        let spec = StepOperatorSpec::vacuum(coins, rotation_2flavor(0.0));
        let mut stepper = Stepper::new(&spec, 16).unwrap();
        let mut s = plane_wave_state(16, 2, 2, 0, Spin::Up).unwrap();
        for _ in 0..50 {
            stepper.advance(&mut s).unwrap();
            let p = s.flavor_probabilities();
            assert!((p[0] - 1.0).abs() < 1e-14 && p[1].abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let coins = CoinParameters::new(1.0, vec![0.1, 0.2, 0.3]).unwrap();
        let spec = StepOperatorSpec::vacuum(coins, rotation_2flavor(0.3));
        let s = plane_wave_state(8, 3, 1, 0, Spin::Up).unwrap();
        assert!(matches!(
            step(&s, &spec),
            Err(WalkError::DimensionMismatch { .. })
        ));

        let coins = CoinParameters::new(1.0, vec![0.1, 0.2]).unwrap();
        let spec = StepOperatorSpec::vacuum(coins, rotation_2flavor(0.3));
        let s = plane_wave_state(8, 3, 1, 0, Spin::Up).unwrap();
        assert!(matches!(
            step(&s, &spec),
            Err(WalkError::DimensionMismatch { .. })
        ));

        let spec = spec.with_matter(MatterProfile::Table {
            values: vec![0.0; 4],
        });
        let s = plane_wave_state(8, 2, 1, 0, Spin::Up).unwrap();
        assert!(matches!(
            step(&s, &spec),
            Err(WalkError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mass_basis_state_rejected_by_flavor_step() {
        let coins = CoinParameters::new(1.0, vec![0.1, 0.2]).unwrap();
        let mixer = rotation_2flavor(0.3);
        let spec = StepOperatorSpec::vacuum(coins, mixer.clone());
        let s = plane_wave_state(8, 2, 1, 0, Spin::Up)
            .unwrap()
            .to_basis(&mixer, Basis::Mass)
            .unwrap();
        assert!(matches!(step(&s, &spec), Err(WalkError::WrongBasis { .. })));
    }

    #[test]
    fn coin_parameter_validation() {
        assert!(CoinParameters::new(0.0, vec![0.1, 0.2]).is_err());
        assert!(CoinParameters::new(1.0, vec![0.1]).is_err());
        assert!(CoinParameters::new(1.0, vec![0.1, 1.6]).is_err());
        assert!(CoinParameters::new(1.0, vec![0.1, -1.5]).is_ok());
    }
}
