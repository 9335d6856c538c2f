//! Experiment configuration: one strict JSON document.
//!
//! Unknown keys are rejected so typos in experiment definitions fail loudly
//! instead of silently falling back to defaults.

use crate::CliError;
use coastal_core::fields::Scenario;
use coastal_core::grid::TorusGrid;
use coastal_core::init::InitialData;
use coastal_core::limit_solver::InitVariant;
use coastal_core::testfn::TestFunctionSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "default_period")]
    pub lx: f64,
    #[serde(default = "default_period")]
    pub ly: f64,
}

fn default_period() -> f64 {
    2.0 * std::f64::consts::PI
}

impl GridSpec {
    pub fn build(&self) -> Result<TorusGrid, CliError> {
        TorusGrid::new(self.nx, self.ny, self.lx, self.ly)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Where the forcing scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    Builtin {
        builtin: String,
    },
    Path {
        path: PathBuf,
    },
    Inline {
        inline: Box<Scenario>,
    },
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::Builtin {
            builtin: "default_forcing".to_string(),
        }
    }
}

impl ScenarioSpec {
    pub fn load(&self, base_dir: &Path) -> Result<Scenario, CliError> {
        match self {
            ScenarioSpec::Builtin { builtin } => match builtin.as_str() {
                "default_forcing" => Ok(Scenario::default_forcing()),
                "quiescent" => Ok(Scenario::quiescent()),
                "uniform_advection" => Ok(coastal_core::limit_solver::uniform_advection_scenario()),
                other => Err(CliError::Config(format!(
                    "unknown builtin scenario '{other}' (expected default_forcing, quiescent or uniform_advection)"
                ))),
            },
            ScenarioSpec::Path { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    CliError::Config(format!("cannot read scenario {}: {e}", full.display()))
                })?;
                Scenario::from_json(&text).map_err(|e| CliError::Config(e.to_string()))
            }
            ScenarioSpec::Inline { inline } => {
                inline
                    .validate()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok((**inline).clone())
            }
        }
    }
}

/// Which limit initial-condition variants a comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitVariantChoice {
    Printed,
    Curl,
    Both,
}

impl InitVariantChoice {
    pub fn variants(&self) -> Vec<InitVariant> {
        match self {
            InitVariantChoice::Printed => vec![InitVariant::Printed],
            InitVariantChoice::Curl => vec![InitVariant::Curl],
            InitVariantChoice::Both => vec![InitVariant::Printed, InitVariant::Curl],
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "printed" => Ok(InitVariantChoice::Printed),
            "curl" => Ok(InitVariantChoice::Curl),
            "both" => Ok(InitVariantChoice::Both),
            other => Err(CliError::Config(format!(
                "unknown init variant '{other}' (expected printed, curl or both)"
            ))),
        }
    }
}

/// One experiment: grid, forcing, initial data, the descending eps list,
/// horizon, test functions and output knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub grid: GridSpec,
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    pub eps_list: Vec<f64>,
    pub t_end: f64,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    /// Defaults to the built-in five-function family when absent.
    #[serde(default)]
    pub test_functions: Option<Vec<TestFunctionSpec>>,
    #[serde(default = "default_variant")]
    pub init_variant: InitVariantChoice,
    /// Pair the limit trajectory against itself instead of running the
    /// stiff solver; every relative error is then exactly zero.
    #[serde(default)]
    pub self_comparison: bool,
}

fn default_initial() -> InitialData {
    InitialData::default_bump()
}

fn default_safety() -> f64 {
    0.5
}

fn default_stride() -> usize {
    32
}

fn default_variant() -> InitVariantChoice {
    InitVariantChoice::Both
}

impl ExperimentConfig {
    /// The default experiment: 64^2 box, built-in scenario and bump data,
    /// eps halvings 1/10 .. 1/80, horizon 0.5.
    pub fn default_experiment() -> Self {
        ExperimentConfig {
            version: CONFIG_SCHEMA_VERSION,
            grid: GridSpec {
                nx: 64,
                ny: 64,
                lx: default_period(),
                ly: default_period(),
            },
            scenario: ScenarioSpec::default(),
            initial: default_initial(),
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            t_end: 0.5,
            cfl_safety: default_safety(),
            output_stride: default_stride(),
            test_functions: None,
            init_variant: default_variant(),
            self_comparison: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config schema version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.version
            )));
        }
        if self.eps_list.is_empty() {
            return Err(CliError::Config("eps_list must not be empty".into()));
        }
        for pair in self.eps_list.windows(2) {
            if pair[1] >= pair[0] {
                return Err(CliError::Config(format!(
                    "eps_list must be strictly decreasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &e in &self.eps_list {
            if !(e > 0.0 && e < 1.0) {
                return Err(CliError::Config(format!("eps {e} not in (0, 1)")));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(CliError::Config("t_end must be finite and nonnegative".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(CliError::Config("cfl_safety must be in (0, 1]".into()));
        }
        if self.output_stride == 0 {
            return Err(CliError::Config("output_stride must be positive".into()));
        }
        Ok(())
    }

    /// The test-function specs in force (explicit list or default family).
    pub fn test_function_specs(&self) -> Vec<TestFunctionSpec> {
        self.test_functions
            .clone()
            .unwrap_or_else(coastal_core::testfn::default_test_functions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_roundtrips() {
        let cfg = ExperimentConfig::default_experiment();
        let json = cfg.to_json();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let json = ExperimentConfig::default_experiment()
            .to_json()
            .replacen("\"t_end\"", "\"t_emd\"", 1);
        let err = ExperimentConfig::from_json(&json).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn eps_list_must_decrease() {
        let mut cfg = ExperimentConfig::default_experiment();
        cfg.eps_list = vec![0.05, 0.1];
        assert!(cfg.validate().is_err());
        cfg.eps_list = vec![0.1, 0.1];
        assert!(cfg.validate().is_err());
        cfg.eps_list = vec![1.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn builtin_scenarios_load() {
        let spec = ScenarioSpec::default();
        let sc = spec.load(Path::new(".")).unwrap();
        assert_eq!(sc.name, "default-forcing");
        let bad = ScenarioSpec::Builtin {
            builtin: "maelstrom".into(),
        };
        assert!(bad.load(Path::new(".")).is_err());
    }
}
