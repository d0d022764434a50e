//! JSON scenario configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Boundary, CoinParameters, MatterProfile, Spin};
use crate::mixing::MixingAngles;
use crate::oracle::ExperimentSpec;
use crate::WalkError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("could not parse config: {0}")]
    Parse(String),

    #[error("invalid config value `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Re-labels a kernel validation error with its config key.
    fn from_walk(section: &str, err: WalkError) -> Self {
        let key = match &err {
            WalkError::InvalidParameter { name, .. } => format!("{section}.{name}"),
            _ => section.to_string(),
        };
        ConfigError::Invalid {
            key,
            reason: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Vacuum,
    Matter,
    Levels,
    Compare,
    MapExperiment,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Vacuum => "vacuum",
            ScenarioKind::Matter => "matter",
            ScenarioKind::Levels => "levels",
            ScenarioKind::Compare => "compare",
            ScenarioKind::MapExperiment => "map-experiment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    E,
    Mu,
    Tau,
}

impl Flavor {
    pub fn index(self) -> usize {
        match self {
            Flavor::E => 0,
            Flavor::Mu => 1,
            Flavor::Tau => 2,
        }
    }
}

/// Column labels for `n` flavors.
pub fn flavor_labels(n: usize) -> &'static [&'static str] {
    &["e", "mu", "tau"][..n]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub mode_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// Gaussian envelope for a localized initial state (center and standard
/// deviation in sites).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "default_flavor")]
    pub flavor: Flavor,
    #[serde(default = "default_spin")]
    pub spin: Spin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<PacketConfig>,
}

fn default_flavor() -> Flavor {
    Flavor::E
}

fn default_spin() -> Spin {
    Spin::Up
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            flavor: Flavor::E,
            spin: Spin::Up,
            packet: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            path: None,
            format: OutputFormat::Csv,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dm2: f64,
    pub energy: f64,
    pub baseline: f64,
    pub target_steps: usize,
}

impl ExperimentConfig {
    pub fn spec(&self) -> ExperimentSpec {
        ExperimentSpec {
            dm2: self.dm2,
            energy: self.energy,
            baseline: self.baseline,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngles {
    phi12: Option<f64>,
    e_mu: Option<f64>,
    e_tau: Option<f64>,
    mu_tau: Option<f64>,
}

impl RawAngles {
    fn resolve(self) -> Result<MixingAngles, ConfigError> {
        let angles = match self {
            RawAngles {
                phi12: Some(phi12),
                e_mu: None,
                e_tau: None,
                mu_tau: None,
            } => MixingAngles::TwoFlavor { phi12 },
            RawAngles {
                phi12: None,
                e_mu: Some(e_mu),
                e_tau: Some(e_tau),
                mu_tau: Some(mu_tau),
            } => MixingAngles::ThreeFlavor {
                e_mu,
                e_tau,
                mu_tau,
            },
            _ => {
                return Err(ConfigError::invalid(
                    "angles",
                    "give either `phi12` (two flavors) or all of `e_mu`, `e_tau`, `mu_tau`",
                ))
            }
        };
        Ok(angles)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioKind,
    #[serde(default)]
    boundary: Boundary,
    lattice: Option<LatticeConfig>,
    coins: Option<CoinParameters>,
    angles: Option<RawAngles>,
    matter: Option<MatterProfile>,
    #[serde(default)]
    initial: InitialConfig,
    #[serde(default)]
    output: OutputConfig,
    experiment: Option<ExperimentConfig>,
}

/// A fully validated scenario. Sections not used by the scenario kind are
/// rejected at parse time, so the ones present are exactly those needed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub boundary: Boundary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coins: Option<CoinParameters>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles: Option<MixingAngles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matter: Option<MatterProfile>,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
}

fn required<'a, T>(
    value: &'a Option<T>,
    key: &str,
    kind: ScenarioKind,
) -> Result<&'a T, ConfigError> {
    value.as_ref().ok_or_else(|| {
        ConfigError::invalid(key, format!("required for the `{}` scenario", kind.name()))
    })
}

fn forbidden<T>(value: &Option<T>, key: &str, kind: ScenarioKind) -> Result<(), ConfigError> {
    match value {
        Some(_) => Err(ConfigError::invalid(
            key,
            format!("not used by the `{}` scenario", kind.name()),
        )),
        None => Ok(()),
    }
}

impl ScenarioConfig {
    pub fn lattice(&self) -> Result<&LatticeConfig, ConfigError> {
        required(&self.lattice, "lattice", self.scenario)
    }

    pub fn coins(&self) -> Result<&CoinParameters, ConfigError> {
        required(&self.coins, "coins", self.scenario)
    }

    pub fn angles(&self) -> Result<&MixingAngles, ConfigError> {
        required(&self.angles, "angles", self.scenario)
    }

    pub fn steps(&self) -> Result<usize, ConfigError> {
        self.lattice()?
            .steps
            .ok_or_else(|| ConfigError::invalid("lattice.steps", "required for time evolution"))
    }

    pub fn experiment(&self) -> Result<&ExperimentConfig, ConfigError> {
        required(&self.experiment, "experiment", self.scenario)
    }

    pub fn n_flavors(&self) -> Result<usize, ConfigError> {
        Ok(self.coins()?.n_flavors())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let kind = self.scenario;
        if self.output.stride == 0 {
            return Err(ConfigError::invalid("output.stride", "must be at least 1"));
        }
        if kind == ScenarioKind::MapExperiment {
            for (present, key) in [
                (self.lattice.is_some(), "lattice"),
                (self.coins.is_some(), "coins"),
                (self.matter.is_some(), "matter"),
            ] {
                if present {
                    return Err(ConfigError::invalid(
                        key,
                        "not used by the `map-experiment` scenario",
                    ));
                }
            }
            let experiment = self.experiment()?;
            experiment
                .spec()
                .validate()
                .map_err(|e| ConfigError::from_walk("experiment", e))?;
            if experiment.target_steps == 0 {
                return Err(ConfigError::invalid(
                    "experiment.target_steps",
                    "must be at least 1",
                ));
            }
            return Ok(());
        }

        forbidden(&self.experiment, "experiment", kind)?;
        let lattice = self.lattice()?;
        let coins = self.coins()?;
        let angles = self.angles()?;
        coins
            .validate()
            .map_err(|e| ConfigError::from_walk("coins", e))?;
        let n = coins.n_flavors();
        if angles.n_flavors() != n {
            return Err(ConfigError::invalid(
                "angles",
                format!(
                    "{} coin angles given but the mixing angles describe {} flavors",
                    n,
                    angles.n_flavors()
                ),
            ));
        }
        if lattice.n_sites < 2 {
            return Err(ConfigError::invalid(
                "lattice.n_sites",
                "must be at least 2",
            ));
        }
        if lattice.mode_index >= lattice.n_sites {
            return Err(ConfigError::invalid(
                "lattice.mode_index",
                format!("must be below n_sites = {}", lattice.n_sites),
            ));
        }
        if let Some(profile) = &self.matter {
            profile
                .validate(lattice.n_sites)
                .map_err(|e| ConfigError::from_walk("matter", e))?;
        }
        if self.initial.flavor.index() >= n {
            return Err(ConfigError::invalid(
                "initial.flavor",
                format!("only {n} flavors are simulated"),
            ));
        }
        if let Some(packet) = &self.initial.packet {
            if !(packet.width.is_finite() && packet.width > 0.0) {
                return Err(ConfigError::invalid(
                    "initial.packet.width",
                    "must be positive",
                ));
            }
            if !(packet.center.is_finite()
                && packet.center >= 0.0
                && packet.center < lattice.n_sites as f64)
            {
                return Err(ConfigError::invalid(
                    "initial.packet.center",
                    "must lie on the lattice",
                ));
            }
        }

        match kind {
            ScenarioKind::Vacuum | ScenarioKind::Compare | ScenarioKind::Matter => {
                match lattice.steps {
                    None => {
                        return Err(ConfigError::invalid(
                            "lattice.steps",
                            "required for time evolution",
                        ))
                    }
                    Some(0) => {
                        return Err(ConfigError::invalid("lattice.steps", "must be at least 1"))
                    }
                    Some(_) => {}
                }
            }
            _ => {
                if lattice.steps.is_some() {
                    return Err(ConfigError::invalid(
                        "lattice.steps",
                        "not used by the `levels` scenario",
                    ));
                }
            }
        }
        match kind {
            ScenarioKind::Vacuum => forbidden(&self.matter, "matter", kind)?,
            ScenarioKind::Matter | ScenarioKind::Levels => {
                required(&self.matter, "matter", kind)?;
                if n != 2 {
                    return Err(ConfigError::invalid(
                        "coins.thetas",
                        format!("the `{}` scenario is two-flavor only", kind.name()),
                    ));
                }
            }
            ScenarioKind::Compare => {
                if let Some(profile) = &self.matter {
                    if profile.uniform_value().is_none() {
                        return Err(ConfigError::invalid(
                            "matter",
                            "the momentum-space comparison needs a uniform density",
                        ));
                    }
                }
                if self.initial.packet.is_some() {
                    return Err(ConfigError::invalid(
                        "initial.packet",
                        "the momentum-space comparison needs a plane wave",
                    ));
                }
            }
            ScenarioKind::MapExperiment => unreachable!(),
        }
        if kind == ScenarioKind::Levels && self.initial.packet.is_some() {
            return Err(ConfigError::invalid(
                "initial.packet",
                "not used by the `levels` scenario",
            ));
        }
        Ok(())
    }
}

/// Parses and validates a JSON scenario document.
pub fn parse_config(text: &[u8]) -> Result<ScenarioConfig, ConfigError> {
    let text = std::str::from_utf8(text)
        .map_err(|e| ConfigError::Parse(format!("config is not UTF-8: {e}")))?;
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let angles = raw.angles.map(RawAngles::resolve).transpose()?;
    let config = ScenarioConfig {
        scenario: raw.scenario,
        boundary: raw.boundary,
        lattice: raw.lattice,
        coins: raw.coins,
        angles,
        matter: raw.matter,
        initial: raw.initial,
        output: raw.output,
        experiment: raw.experiment,
    };
    config.validate()?;
    Ok(config)
}
