use serde::{Deserialize, Serialize};

use crate::{Result, WalkError};

/// Matter density ρ as a function of position, in the same lattice units
/// as the coin angles θ. Position of site `p` is `x_p = p·ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatterProfile {
    Uniform {
        rho: f64,
    },
    /// `ρ(x) = slope·x + intercept` where positive; zero (vacuum) elsewhere.
    Linear {
        slope: f64,
        intercept: f64,
    },
    /// One value per site.
    Table {
        values: Vec<f64>,
    },
}

impl MatterProfile {
    /// Checks that the profile is finite and evaluable on every site.
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        let finite = match self {
            MatterProfile::Uniform { rho } => rho.is_finite(),
            MatterProfile::Linear { slope, intercept } => {
                slope.is_finite() && intercept.is_finite()
            }
            MatterProfile::Table { values } => {
                if values.len() != n_sites {
                    return Err(WalkError::DimensionMismatch {
                        what: "density table",
                        expected: n_sites,
                        found: values.len(),
                    });
                }
                values.iter().all(|v| v.is_finite())
            }
        };
        if finite {
            Ok(())
        } else {
            Err(WalkError::invalid("matter", "densities must be finite"))
        }
    }

    /// Density at site `site`. Table profiles must already be validated.
    pub fn density_at(&self, site: usize, epsilon: f64) -> f64 {
        match self {
            MatterProfile::Uniform { rho } => *rho,
            MatterProfile::Linear { slope, intercept } => {
                (slope * site as f64 * epsilon + intercept).max(0.0)
            }
            MatterProfile::Table { values } => values[site],
        }
    }

    pub fn densities(&self, n_sites: usize, epsilon: f64) -> Result<Vec<f64>> {
        self.validate(n_sites)?;
        Ok((0..n_sites).map(|p| self.density_at(p, epsilon)).collect())
    }

    /// The constant density if the profile is translation invariant.
    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            MatterProfile::Uniform { rho } => Some(*rho),
            MatterProfile::Linear { slope, intercept } if *slope == 0.0 => Some(intercept.max(0.0)),
            MatterProfile::Table { values } => {
                let first = *values.first()?;
                values.iter().all(|v| *v == first).then_some(first)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_profile_clamps_to_vacuum() {
        let p = MatterProfile::Linear {
            slope: 2.0,
            intercept: -3.0,
        };
        let d = p.densities(4, 0.5).unwrap();
        assert_eq!(d, vec![0.0, 0.0, 0.0, 0.0]);
        let d = p.densities(8, 1.0).unwrap();
        assert_eq!(d, vec![0.0, 0.0, 1.0, 3.0, 5.0, 7.0, 9.0, 11.0]);
    }

    #[test]
    fn table_must_cover_lattice() {
        let p = MatterProfile::Table {
            values: vec![0.0; 3],
        };
        assert!(p.validate(4).is_err());
        assert!(p.validate(3).is_ok());
    }

    #[test]
    fn uniform_detection() {
        assert_eq!(
            MatterProfile::Uniform { rho: 0.2 }.uniform_value(),
            Some(0.2)
        );
        let lin = MatterProfile::Linear {
            slope: 1.0,
            intercept: 0.0,
        };
        assert_eq!(lin.uniform_value(), None);
        let flat = MatterProfile::Table {
            values: vec![0.1; 5],
        };
        assert_eq!(flat.uniform_value(), Some(0.1));
    }
}
