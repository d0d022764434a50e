//! Scenario runner: JSON configs in, probability tables out.

mod config;
mod fit;
mod output;
mod run;

use thiserror::Error;

use crate::WalkError;

pub use config::{
    flavor_labels, parse_config, ConfigError, ExperimentConfig, Flavor, InitialConfig,
    LatticeConfig, OutputConfig, OutputFormat, PacketConfig, ScenarioConfig, ScenarioKind,
};
pub use fit::{fit_sinusoid, SinusoidFit};
pub use output::{
    format_number, json_number, ComparisonReport, ExperimentMapping, LevelRow, LevelTable,
    MatterOracle, ProbabilitySeries, ScenarioOutput, SeriesRow,
};
pub use run::{
    compare_series, map_experiment, momentum_series, run_compare, run_levels, run_matter,
    run_scenario, run_vacuum, COMPARE_TOLERANCE, MAPPING_KAPPA, RELATIVISTIC_RATIO,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Walk(#[from] WalkError),

    #[error("the two series do not describe the same run: `{key}` differs")]
    Mismatch { key: &'static str },

    #[error(
        "a phase of {phase} rad needs at least {required_steps} steps with coin angles below κ/5, \
         but only {target_steps} were allowed"
    )]
    Infeasible {
        phase: f64,
        required_steps: usize,
        target_steps: usize,
    },
}
