//! Two-flavor propagation in matter: effective mixing angle, level
//! crossing, adiabaticity and the non-adiabatic crossing probability.
//!
//! The energy E is identified with the wavenumber k throughout.

use std::f64::consts::{FRAC_PI_2, PI};

use super::vacuum::EffectiveHamiltonian;
use crate::{Result, WalkError};

/// Matter quantities at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MswPoint {
    /// Effective mixing angle Φ ∈ [0, π/2].
    pub phi_matter: f64,
    /// `A = (cos 2φ − 2kρ/Δm²)² + sin² 2φ`.
    pub resonance_factor: f64,
    /// Adiabaticity γ, when a density gradient was supplied.
    pub gamma: Option<f64>,
    pub rho: f64,
}

impl MswPoint {
    pub fn sin2_2phi(&self) -> f64 {
        (2.0 * self.phi_matter).sin().powi(2)
    }
}

fn check_inputs(phi: f64, dm2: f64, k: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&phi) {
        return Err(WalkError::invalid(
            "phi",
            format!("vacuum angle {phi} outside [0, π/2]"),
        ));
    }
    if !(dm2.is_finite() && dm2 > 0.0) {
        return Err(WalkError::invalid("dm2", "mass splitting must be positive"));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(WalkError::invalid("k", "wavenumber must be positive"));
    }
    Ok(())
}

/// `ρ_res = Δm² cos 2φ / (2k)`.
pub fn resonance_density(phi: f64, dm2: f64, k: f64) -> f64 {
    dm2 * (2.0 * phi).cos() / (2.0 * k)
}

/// Effective mixing angle from `tan 2Φ = sin 2φ / (cos 2φ − 2kρ/Δm²)`,
/// on the branch that is continuous in ρ, equals φ in vacuum, passes π/4
/// at resonance and tends to π/2 at high density.
pub fn matter_mixing_angle(phi: f64, dm2: f64, k: f64, rho: f64) -> Result<MswPoint> {
    check_inputs(phi, dm2, k)?;
    let (s, c) = (2.0 * phi).sin_cos();
    let detuning = c - 2.0 * k * rho / dm2;
    if s == 0.0 && detuning == 0.0 {
        return Err(WalkError::DegenerateResonance { phi });
    }
    Ok(MswPoint {
        phi_matter: 0.5 * s.atan2(detuning),
        resonance_factor: detuning * detuning + s * s,
        gamma: None,
        rho,
    })
}

/// `∂ₓΦ = sin 2φ · k ρ′ / (A Δm²)`, the chain rule applied to the closed form.
pub fn matter_angle_gradient(phi: f64, dm2: f64, k: f64, rho: f64, drho_dx: f64) -> Result<f64> {
    let point = matter_mixing_angle(phi, dm2, k, rho)?;
    Ok((2.0 * phi).sin() * k * drho_dx / (point.resonance_factor * dm2))
}

/// `γ = Δm² / (4k |∂ₓΦ|)`; `+∞` when Φ does not vary.
pub fn adiabaticity(phi: f64, dm2: f64, k: f64, rho: f64, drho_dx: f64) -> Result<f64> {
    if !drho_dx.is_finite() {
        return Err(WalkError::invalid(
            "drho_dx",
            "density gradient must be finite",
        ));
    }
    let gradient = matter_angle_gradient(phi, dm2, k, rho, drho_dx)?;
    if gradient == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(dm2 / (4.0 * k * gradient.abs()))
}

/// [`matter_mixing_angle`] with the adiabaticity filled in.
pub fn msw_point(phi: f64, dm2: f64, k: f64, rho: f64, drho_dx: f64) -> Result<MswPoint> {
    let mut point = matter_mixing_angle(phi, dm2, k, rho)?;
    point.gamma = Some(adiabaticity(phi, dm2, k, rho, drho_dx)?);
    Ok(point)
}

/// Ascending eigenvalues of the two-flavor matter Hamiltonian
/// `k + R diag(θ̄₁², θ̄₂²) R† / (2k) + diag(ρ, 0)`.
pub fn matter_eigenvalues(h: &EffectiveHamiltonian) -> Result<(f64, f64)> {
    if h.mixer.dimension() != 2 {
        return Err(WalkError::DimensionMismatch {
            what: "mixer dimension",
            expected: 2,
            found: h.mixer.dimension(),
        });
    }
    let scale = 1.0 / (2.0 * h.k);
    let m2 = [h.masses[0].powi(2), h.masses[1].powi(2)];
    let entry = |a: usize, b: usize| {
        (0..2)
            .map(|i| h.mixer.entry(a, i) * m2[i] * h.mixer.entry(b, i).conj())
            .sum::<num_complex::Complex64>()
            * scale
    };
    let diag_e = entry(0, 0).re + h.rho;
    let diag_mu = entry(1, 1).re;
    let off = entry(0, 1).norm();
    let half_gap = (0.5 * (diag_e - diag_mu)).hypot(off);
    let mean = h.k + 0.5 * (diag_e + diag_mu);
    Ok((mean - half_gap, mean + half_gap))
}

/// Crossing probability
/// `[e^{−πγ/2} − e^{−πγ/(2 sin²φ)}] / [1 − e^{−πγ/(2 sin²φ)}]`,
/// with the γ → 0 limit `cos²φ`.
pub fn crossing_probability(gamma_r: f64, phi: f64) -> Result<f64> {
    if gamma_r.is_nan() || gamma_r < 0.0 {
        return Err(WalkError::invalid(
            "gamma_r",
            "adiabaticity must be non-negative",
        ));
    }
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(WalkError::invalid(
            "phi",
            format!("vacuum angle {phi} outside (0, π/2)"),
        ));
    }
    if gamma_r == 0.0 {
        return Ok(phi.cos().powi(2));
    }
    if gamma_r.is_infinite() {
        return Ok(0.0);
    }
    let a = 0.5 * PI * gamma_r;
    let b = a / phi.sin().powi(2);
    // e^{−a} − e^{−b} = −e^{−a}·expm1(a − b), written to survive γ → 0.
    let numerator = -(-a).exp() * (a - b).exp_m1();
    let denominator = -(-b).exp_m1();
    Ok((numerator / denominator).clamp(0.0, 1.0))
}

/// Averaged `ν_e → ν_μ` probability after one resonance crossing:
/// `1/2 − (1/2 − P_c) cos 2Φ_f cos 2Φ_i`.
pub fn asymptotic_transition(p_c: f64, phi_initial: f64, phi_final: f64) -> f64 {
    let p = 0.5 - (0.5 - p_c) * (2.0 * phi_final).cos() * (2.0 * phi_initial).cos();
    const EDGE: f64 = 1e-12;
    if (-EDGE..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + EDGE {
        1.0
    } else {
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::rotation_2flavor;
    use std::f64::consts::FRAC_PI_4;

    const DM2: f64 = 0.03;
    const K: f64 = 100.0;

    #[test]
    fn vacuum_limit() {
        for phi in [0.12, 0.34, 0.84] {
            let p = matter_mixing_angle(phi, DM2, K, 0.0).unwrap();
            assert!((p.resonance_factor - 1.0).abs() < 1e-15);
            assert!((p.phi_matter - phi).abs() < 1e-15);
        }
    }

    #[test]
    fn maximal_mixing_at_resonance() {
        let phi = 0.34;
        let rho = resonance_density(phi, DM2, K);
        let p = matter_mixing_angle(phi, DM2, K, rho).unwrap();
        assert!((p.sin2_2phi() - 1.0).abs() < 1e-15);
        assert!((p.phi_matter - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn high_density_limit() {
        let phi = 0.34;
        let mut last = 0.0;
        for rho in [0.0, 1e-4, 1e-3, 1e-2, 1.0, 1e3] {
            let p = matter_mixing_angle(phi, DM2, K, rho).unwrap();
            assert!(p.phi_matter >= last);
            last = p.phi_matter;
        }
        let p = matter_mixing_angle(phi, DM2, K, 1e6).unwrap();
        assert!((p.phi_matter - FRAC_PI_2).abs() < 1e-9);
        assert!(p.sin2_2phi() < 1e-17);
    }

    #[test]
    fn degenerate_resonance_reported() {
        // φ = π/4 has its resonance at ρ = 0, but sin 2φ ≠ 0 keeps it defined.
        assert!(matter_mixing_angle(FRAC_PI_4, DM2, K, 0.0).is_ok());
        // φ = 0 resonates at ρ = Δm²/(2k), where the angle is undefined.
        let rho = DM2 / (2.0 * K);
        assert_eq!(
            matter_mixing_angle(0.0, DM2, K, rho),
            Err(WalkError::DegenerateResonance { phi: 0.0 })
        );
        assert!(matter_mixing_angle(0.0, DM2, K, 0.0).is_ok());
        assert!(matter_mixing_angle(1.7, DM2, K, 0.0).is_err());
        assert!(matter_mixing_angle(0.3, -DM2, K, 0.0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for phi in [0.12, 0.34, 0.6, 0.84] {
            for rho in [0.0, 5e-5, 1.3e-4, 4e-4] {
                let slope = 2.5;
                let h = 1e-9;
                let up = matter_mixing_angle(phi, DM2, K, rho + slope * h)
                    .unwrap()
                    .phi_matter;
                let down = matter_mixing_angle(phi, DM2, K, rho - slope * h)
                    .unwrap()
                    .phi_matter;
                let fd = (up - down) / (2.0 * h);
                let exact = matter_angle_gradient(phi, DM2, K, rho, slope).unwrap();
                assert!(
                    ((fd - exact) / exact).abs() < 1e-6,
                    "phi {phi}, rho {rho}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn adiabaticity_at_resonance() {
        let phi = 0.34;
        let rho = resonance_density(phi, DM2, K);
        let grad = matter_angle_gradient(phi, DM2, K, rho, 1.0).unwrap();
        assert!((grad - K / (DM2 * (2.0 * phi).sin())).abs() / grad < 1e-14);
        let gamma = adiabaticity(phi, DM2, K, rho, 1.0).unwrap();
        let expected = (2.0 * phi).sin() * DM2 * DM2 / (4.0 * K * K);
        assert!((gamma - expected).abs() / expected < 1e-14);
        let half = adiabaticity(phi, DM2, K, rho, 2.0).unwrap();
        assert!((gamma / half - 2.0).abs() < 1e-14);
        assert_eq!(adiabaticity(phi, DM2, K, rho, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(msw_point(phi, DM2, K, rho, 1.0).unwrap().gamma, Some(gamma));
    }

    #[test]
    fn eigenvalues_in_vacuum_and_at_resonance() {
        let h = EffectiveHamiltonian::new(K, vec![0.1, 0.2], rotation_2flavor(0.34), 0.0).unwrap();
        let (e1, e2) = matter_eigenvalues(&h).unwrap();
        assert!((e1 - (K + 0.01 / (2.0 * K))).abs() < 1e-12);
        assert!((e2 - (K + 0.04 / (2.0 * K))).abs() < 1e-12);

        for phi in [0.12, 0.34, 0.84] {
            let rho = resonance_density(phi, DM2, K);
            let h =
                EffectiveHamiltonian::new(K, vec![0.1, 0.2], rotation_2flavor(phi), rho).unwrap();
            let (e1, e2) = matter_eigenvalues(&h).unwrap();
            let expected = DM2 * (2.0 * phi).sin() / (2.0 * K);
            assert!(((e2 - e1) - expected).abs() / expected < 1e-8);
        }
    }

    #[test]
    fn crossing_probability_examples() {
        let expected = ((-PI / 2.0).exp() - (-PI).exp()) / (1.0 - (-PI).exp());
        let p = crossing_probability(1.0, FRAC_PI_4).unwrap();
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.172_102_898_683_663_8).abs() < 1e-15);
        for phi in [0.12, 0.34, 0.84] {
            assert_eq!(crossing_probability(0.0, phi).unwrap(), phi.cos().powi(2));
            assert!((crossing_probability(1e-9, phi).unwrap() - phi.cos().powi(2)).abs() < 1e-8);
            assert!(crossing_probability(40.0, phi).unwrap() < 1e-20);
        }
        assert!(crossing_probability(-1.0, 0.3).is_err());
        assert!(crossing_probability(1.0, 0.0).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        for (a, b) in [(0.1, 1.2), (FRAC_PI_2, 0.0), (0.7, 0.7)] {
            assert!((asymptotic_transition(0.5, a, b) - 0.5).abs() < 1e-15);
        }
        let phi = 0.34;
        assert!((asymptotic_transition(0.0, FRAC_PI_2, phi) - phi.cos().powi(2)).abs() < 1e-15);
        assert_eq!(asymptotic_transition(0.0, 0.0, 0.0), 0.0);
    }
}
