//! Pipeline configuration, read from a single TOML document.
//!
//! ```toml
//! dataset = "dataset.csv"
//! schema = "schema.toml"
//!
//! [truth_table]
//! freq_threshold = 1
//! cons_threshold = 0.8
//!
//! [calibration]
//! terminal = [9.5, 5.0, 0.5]   # full in, crossover, full out
//!
//! [expectations]
//! terminal = "present"
//!
//! [[run]]
//! name = "development"
//! outcome = "development"
//! ```
//!
//! Paths are relative to the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::CalibrationSpec;
use crate::dataset::{ConditionGroup, Schema};
use crate::minimize::Expectation;
use crate::truthtable::Thresholds;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{context}: unknown condition `{id}`")]
    UnknownCondition { context: String, id: String },
    #[error("{context}: unknown run `{name}`")]
    UnknownRun { context: String, name: String },
    #[error("duplicate run name `{0}`")]
    DuplicateRun(String),
    #[error("no [[run]] sections")]
    NoRuns,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub outcome: String,
    /// Defaults to every schema condition that is neither this run's
    /// outcome nor in the outcome group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesConfig {
    #[serde(default)]
    pub group_integration: Vec<String>,
    #[serde(default)]
    pub distinct_outcomes: Vec<String>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default)]
    pub ascii: bool,
    #[serde(default)]
    pub nudge_half: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out(),
            ascii: false,
            nudge_half: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    #[serde(default)]
    pub truth_table: Thresholds,
    #[serde(default)]
    pub calibration: BTreeMap<String, [f64; 3]>,
    #[serde(default)]
    pub expectations: BTreeMap<String, Expectation>,
    #[serde(rename = "run", default)]
    pub runs: Vec<RunConfig>,
    #[serde(default)]
    pub hypotheses: HypothesesConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, String), ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, text))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn calibration_specs(&self) -> Result<BTreeMap<String, CalibrationSpec>, ConfigError> {
        self.calibration
            .iter()
            .map(|(id, a)| {
                CalibrationSpec::new(a[0], a[1], a[2])
                    .map(|s| (id.clone(), s))
                    .map_err(|e| ConfigError::Invalid(format!("calibration.{id}: {e}")))
            })
            .collect()
    }

    pub fn run_conditions(&self, run: &RunConfig, schema: &Schema) -> Vec<String> {
        match &run.conditions {
            Some(c) => c.clone(),
            None => schema
                .conditions
                .iter()
                .filter(|c| c.id != run.outcome && c.group != ConditionGroup::Outcome)
                .map(|c| c.id.clone())
                .collect(),
        }
    }

    pub fn run(&self, name: &str) -> Option<&RunConfig> {
        self.runs.iter().find(|r| r.name == name)
    }

    /// Checks every referenced id against the schema.
    pub fn validate(&self, schema: &Schema) -> Result<(), ConfigError> {
        let known = |context: &str, id: &str| {
            if schema.get(id).is_some() {
                Ok(())
            } else {
                Err(ConfigError::UnknownCondition {
                    context: context.to_string(),
                    id: id.to_string(),
                })
            }
        };
        for id in self.calibration.keys() {
            known("calibration", id)?;
        }
        self.calibration_specs()?;
        for id in self.expectations.keys() {
            known("expectations", id)?;
        }
        if self.runs.is_empty() {
            return Err(ConfigError::NoRuns);
        }
        for (i, r) in self.runs.iter().enumerate() {
            if self.runs[..i].iter().any(|o| o.name == r.name) {
                return Err(ConfigError::DuplicateRun(r.name.clone()));
            }
            let ctx = format!("run `{}`", r.name);
            known(&ctx, &r.outcome)?;
            let conds = self.run_conditions(r, schema);
            for c in &conds {
                known(&ctx, c)?;
            }
            if conds.contains(&r.outcome) {
                return Err(ConfigError::Invalid(format!(
                    "{ctx}: outcome `{}` is also listed as a condition",
                    r.outcome
                )));
            }
            if conds.is_empty() {
                return Err(ConfigError::Invalid(format!("{ctx}: no conditions")));
            }
        }
        let hyp = &self.hypotheses;
        for (context, names) in [
            ("hypotheses.group_integration", &hyp.group_integration),
            ("hypotheses.distinct_outcomes", &hyp.distinct_outcomes),
        ] {
            for name in names {
                if self.run(name).is_none() {
                    return Err(ConfigError::UnknownRun {
                        context: context.to_string(),
                        name: name.clone(),
                    });
                }
            }
        }
        if hyp.distinct_outcomes.len() == 1 {
            return Err(ConfigError::Invalid(
                "hypotheses.distinct_outcomes needs at least 2 runs".into(),
            ));
        }
        Ok(())
    }
}
