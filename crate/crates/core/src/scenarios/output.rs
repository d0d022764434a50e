//! Scenario results and their CSV / JSON renderings.
//!
//! Numbers are written with 12 significant digits so identical inputs give
//! identical bytes.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::config::{flavor_labels, OutputFormat, ScenarioConfig};
use crate::oracle::ExperimentSpec;

/// `{:.11e}` for finite values, `inf` / `-inf` / `nan` otherwise.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `x` rounded to 12 significant digits; non-finite values become `null`.
pub fn json_number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    json!(rounded)
}

fn json_option(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_number)
}

fn meta_value(config: &ScenarioConfig) -> Value {
    serde_json::to_value(config).expect("config serializes")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub step: usize,
    pub time: f64,
    pub probabilities: Vec<f64>,
    pub norm: f64,
}

/// Predictions of the two-flavor resonance model for a matter run.
///
/// The packet is followed along its classical path (↑ moves toward lower
/// site indices, ↓ toward higher ones, at the mean group velocity); the ↓
/// branch feels the density with the opposite sign. Without a packet only
/// the profile quantities are filled in.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatterOracle {
    pub resonance_density: f64,
    /// Site (fractional) where the path first crosses the resonance.
    pub resonance_site: Option<f64>,
    pub gamma_r: Option<f64>,
    pub crossing_probability: Option<f64>,
    pub phi_initial: Option<f64>,
    pub phi_final: Option<f64>,
    /// Late-time average transition probability predicted by the model.
    pub asymptotic_transition: Option<f64>,
    /// Mean transition probability of the walk over the second half of the run.
    pub late_mean_transition: Option<f64>,
}

impl MatterOracle {
    fn fields(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("resonance_density", Some(self.resonance_density)),
            ("resonance_site", self.resonance_site),
            ("gamma_r", self.gamma_r),
            ("crossing_probability", self.crossing_probability),
            ("phi_initial", self.phi_initial),
            ("phi_final", self.phi_final),
            ("asymptotic_transition", self.asymptotic_transition),
            ("late_mean_transition", self.late_mean_transition),
        ]
    }
}

/// Flavor probabilities over time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySeries {
    pub meta: ScenarioConfig,
    pub rows: Vec<SeriesRow>,
    pub oracle: Option<MatterOracle>,
}

impl ProbabilitySeries {
    pub fn n_flavors(&self) -> usize {
        self.rows.first().map_or(0, |r| r.probabilities.len())
    }

    /// Probability of `flavor` at every recorded row.
    pub fn column(&self, flavor: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.probabilities[flavor]).collect()
    }

    pub fn to_csv(&self) -> String {
        let labels = flavor_labels(self.n_flavors());
        let mut out = String::from("step,time");
        for label in labels {
            let _ = write!(out, ",P_{label}");
        }
        out.push_str(",norm\n");
        for row in &self.rows {
            let _ = write!(out, "{},{}", row.step, format_number(row.time));
            for p in &row.probabilities {
                let _ = write!(out, ",{}", format_number(*p));
            }
            let _ = writeln!(out, ",{}", format_number(row.norm));
        }
        if let Some(oracle) = &self.oracle {
            for (name, value) in oracle.fields() {
                let text = value.map_or_else(|| "none".to_string(), format_number);
                let _ = writeln!(out, "# oracle.{name}={text}");
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let labels = flavor_labels(self.n_flavors());
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                obj.insert("step".into(), json!(row.step));
                obj.insert("time".into(), json_number(row.time));
                for (label, p) in labels.iter().zip(&row.probabilities) {
                    obj.insert(format!("P_{label}"), json_number(*p));
                }
                obj.insert("norm".into(), json_number(row.norm));
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("meta".into(), meta_value(&self.meta));
        doc.insert("rows".into(), Value::Array(rows));
        if let Some(oracle) = &self.oracle {
            let fields = oracle
                .fields()
                .into_iter()
                .map(|(name, value)| (name.to_string(), json_option(value)))
                .collect();
            doc.insert("oracle".into(), Value::Object(fields));
        }
        Value::Object(doc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub x: f64,
    pub rho: f64,
    pub e1: f64,
    pub e2: f64,
    pub gap: f64,
}

/// Matter eigenvalues along the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    pub meta: ScenarioConfig,
    pub rows: Vec<LevelRow>,
}

impl LevelTable {
    /// Row with the smallest gap.
    pub fn min_gap(&self) -> Option<&LevelRow> {
        self.rows.iter().min_by(|a, b| a.gap.total_cmp(&b.gap))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,rho,E1m,E2m,gap\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_number(r.x),
                format_number(r.rho),
                format_number(r.e1),
                format_number(r.e2),
                format_number(r.gap)
            );
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "x": json_number(r.x),
                    "rho": json_number(r.rho),
                    "E1m": json_number(r.e1),
                    "E2m": json_number(r.e2),
                    "gap": json_number(r.gap),
                })
            })
            .collect();
        json!({ "meta": meta_value(&self.meta), "rows": rows })
    }
}

/// Lattice walk vs momentum-space evolution of the same plane wave.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub meta: ScenarioConfig,
    pub steps: usize,
    /// Largest `|P_lattice − P_oracle|` per flavor over all recorded steps.
    pub max_deviation: Vec<f64>,
    pub tolerance: f64,
}

impl ComparisonReport {
    pub fn overall_deviation(&self) -> f64 {
        self.max_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.overall_deviation() <= self.tolerance
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("flavor,max_abs_deviation\n");
        for (label, d) in flavor_labels(self.max_deviation.len())
            .iter()
            .zip(&self.max_deviation)
        {
            let _ = writeln!(out, "{label},{}", format_number(*d));
        }
        let _ = writeln!(out, "# steps={}", self.steps);
        let _ = writeln!(out, "# tolerance={}", format_number(self.tolerance));
        let _ = writeln!(out, "# passed={}", self.passed());
        out
    }

    pub fn to_json(&self) -> Value {
        let deviations: Map<String, Value> = flavor_labels(self.max_deviation.len())
            .iter()
            .zip(&self.max_deviation)
            .map(|(label, d)| (format!("P_{label}"), json_number(*d)))
            .collect();
        json!({
            "meta": meta_value(&self.meta),
            "steps": self.steps,
            "max_deviation": deviations,
            "tolerance": json_number(self.tolerance),
            "passed": self.passed(),
        })
    }
}

/// Lattice parameters reproducing the phase of an oscillation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentMapping {
    pub spec: ExperimentSpec,
    pub epsilon: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub kappa: f64,
    pub steps: usize,
    /// Fewest steps that reach the phase with the largest allowed coin angle.
    pub min_steps: usize,
    pub target_phase: f64,
    pub achieved_phase: f64,
    pub relative_residual: f64,
}

impl ExperimentMapping {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "dm2,energy,baseline,epsilon,theta1,theta2,kappa,steps,min_steps,target_phase,achieved_phase,relative_residual\n",
        );
        let values = [
            self.spec.dm2,
            self.spec.energy,
            self.spec.baseline,
            self.epsilon,
            self.theta1,
            self.theta2,
            self.kappa,
        ];
        for v in values {
            out.push_str(&format_number(v));
            out.push(',');
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            self.steps,
            self.min_steps,
            format_number(self.target_phase),
            format_number(self.achieved_phase),
            format_number(self.relative_residual)
        );
        out
    }

    pub fn to_json(&self, meta: Option<&ScenarioConfig>) -> Value {
        let mut doc = Map::new();
        if let Some(meta) = meta {
            doc.insert("meta".into(), meta_value(meta));
        }
        let mapping = json!({
            "dm2": json_number(self.spec.dm2),
            "energy": json_number(self.spec.energy),
            "baseline": json_number(self.spec.baseline),
            "epsilon": json_number(self.epsilon),
            "theta1": json_number(self.theta1),
            "theta2": json_number(self.theta2),
            "kappa": json_number(self.kappa),
            "steps": self.steps,
            "min_steps": self.min_steps,
            "target_phase": json_number(self.target_phase),
            "achieved_phase": json_number(self.achieved_phase),
            "relative_residual": json_number(self.relative_residual),
        });
        doc.insert("mapping".into(), mapping);
        Value::Object(doc)
    }
}

/// Any scenario result.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioOutput {
    Series(ProbabilitySeries),
    Levels(LevelTable),
    Comparison(ComparisonReport),
    Mapping {
        meta: ScenarioConfig,
        mapping: ExperimentMapping,
    },
}

impl ScenarioOutput {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => match self {
                ScenarioOutput::Series(s) => s.to_csv(),
                ScenarioOutput::Levels(t) => t.to_csv(),
                ScenarioOutput::Comparison(c) => c.to_csv(),
                ScenarioOutput::Mapping { mapping, .. } => mapping.to_csv(),
            },
            OutputFormat::Json => {
                let value = match self {
                    ScenarioOutput::Series(s) => s.to_json(),
                    ScenarioOutput::Levels(t) => t.to_json(),
                    ScenarioOutput::Comparison(c) => c.to_json(),
                    ScenarioOutput::Mapping { meta, mapping } => mapping.to_json(Some(meta)),
                };
                let mut text = serde_json::to_string_pretty(&value).expect("output serializes");
                text.push('\n');
                text
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_is_fixed() {
        assert_eq!(format_number(0.0), "0.00000000000e0");
        assert_eq!(format_number(1.0), "1.00000000000e0");
        assert_eq!(format_number(-0.123456789012345), "-1.23456789012e-1");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(json_number(0.123456789012345), json!(0.123456789012));
        assert_eq!(json_number(f64::NAN), Value::Null);
    }
}
