//! Frequency estimation for sampled oscillations.

use nalgebra::{Matrix3, Vector3};

/// Least-squares fit of `a + b cos Ωj + c sin Ωj` to samples `y_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    /// Angular frequency per sample.
    pub omega: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub rms_residual: f64,
}

fn linear_fit(samples: &[f64], omega: f64) -> Option<(Vector3<f64>, f64)> {
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (j, &y) in samples.iter().enumerate() {
        let (s, c) = (omega * j as f64).sin_cos();
        let basis = Vector3::new(1.0, c, s);
        normal += basis * basis.transpose();
        rhs += basis * y;
    }
    let coeffs = normal.cholesky()?.solve(&rhs);
    let residual = samples
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let (s, c) = (omega * j as f64).sin_cos();
            let r = y - coeffs[0] - coeffs[1] * c - coeffs[2] * s;
            r * r
        })
        .sum();
    Some((coeffs, residual))
}

/// Rough frequency from mean-level crossings, with hysteresis so that small
/// fast ripples do not register as extra crossings.
fn crossing_estimate(samples: &[f64]) -> Option<f64> {
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    let band = 0.25 * (hi - lo);
    if band <= 0.0 {
        return None;
    }
    let mut above: Option<bool> = None;
    let mut crossings = Vec::new();
    for (j, &y) in samples.iter().enumerate() {
        let state = if y > mean + band {
            Some(true)
        } else if y < mean - band {
            Some(false)
        } else {
            None
        };
        if let Some(now) = state {
            if above.is_some_and(|before| before != now) {
                crossings.push(j);
            }
            above = Some(now);
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = (crossings[crossings.len() - 1] - crossings[0]) as f64;
    Some(std::f64::consts::PI * (crossings.len() - 1) as f64 / span)
}

/// Fits the dominant slow oscillation. Needs a few full periods in the data;
/// returns `None` for flat or too-short series.
pub fn fit_sinusoid(samples: &[f64]) -> Option<SinusoidFit> {
    if samples.len() < 8 {
        return None;
    }
    let guess = crossing_estimate(samples)?;
    let n = samples.len() as f64;
    let half_width = (std::f64::consts::PI / n).min(0.5 * guess);
    let objective = |omega: f64| linear_fit(samples, omega).map_or(f64::INFINITY, |(_, r)| r);

    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (guess - half_width, guess + half_width);
    let mut x1 = b - golden * (b - a);
    let mut x2 = a + golden * (b - a);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while b - a > 1e-15 * guess.max(1e-300) && b - a > f64::EPSILON * b {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = objective(x2);
        }
    }
    let omega = 0.5 * (a + b);
    let (coeffs, residual) = linear_fit(samples, omega)?;
    Some(SinusoidFit {
        omega,
        offset: coeffs[0],
        amplitude: coeffs[1].hypot(coeffs[2]),
        rms_residual: (residual / n).sqrt(),
    })
}
