//! Batch simulation configuration.
//!
//! A run is one TOML file:
//!
//! ```toml
//! [[scenario]]
//! preset = "sim2-sc1"
//!
//! [design.phase1]
//! p_t = 0.2
//!
//! [replication]
//! replications = 200
//! master_seed = 20240601
//! ```
//!
//! Every `[design]` key defaults to the library default; `master_seed` has no
//! default.

use std::path::{Path, PathBuf};

use pedoop::pkpd::DoseGrid;
use pedoop::sim::{ArmTruth, PkGenerator, ReplicationSettings, Scenario, TrialConfig};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioEntry>,
    #[serde(default)]
    pub design: TrialConfig,
    pub replication: ReplicationBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// A preset (`sim1-sc2`, `sim2-sc12`, ...) optionally overridden field by
/// field, or a fully explicit scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doses: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_tox: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_eff: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pk_gen: Option<PkGenerator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ArmTruth>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationBlock {
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub parallelism: usize,
}

fn default_replications() -> usize {
    200
}

impl From<ReplicationBlock> for ReplicationSettings {
    fn from(b: ReplicationBlock) -> Self {
        ReplicationSettings { replications: b.replications, parallelism: b.parallelism, master_seed: b.master_seed }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn parse_preset(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("sim")?;
    let (study, sc) = rest.split_once("-sc")?;
    Some((study.parse().ok()?, sc.parse().ok()?))
}

impl ScenarioEntry {
    pub fn preset(name: &str) -> Self {
        Self { preset: Some(name.to_string()), ..Self::default() }
    }

    pub fn resolve(&self, position: usize) -> Result<Scenario, ServiceError> {
        let at = |msg: String| ServiceError::Config(format!("scenario[{position}]: {msg}"));
        let base = match &self.preset {
            Some(name) => {
                let (study, n) = parse_preset(name)
                    .ok_or_else(|| at(format!("unknown preset '{name}', expected e.g. sim1-sc2 or sim2-sc3")))?;
                Some(Scenario::preset(study, n).map_err(|e| at(e.to_string()))?)
            }
            None => None,
        };
        let required = |field: &str| at(format!("missing field `{field}` (no preset given)"));
        let grid = match (&self.doses, &base) {
            (Some(d), _) => DoseGrid::new(d.clone()).map_err(|e| at(e.to_string()))?,
            (None, Some(b)) => b.grid.clone(),
            (None, None) => return Err(required("doses")),
        };
        let pick = |own: &Option<Vec<f64>>, from: Option<&Vec<f64>>, field: &str| {
            own.clone().or_else(|| from.cloned()).ok_or_else(|| required(field))
        };
        let scenario = Scenario {
            label: self
                .label
                .clone()
                .or_else(|| self.preset.clone())
                .unwrap_or_else(|| format!("scenario-{}", position + 1)),
            grid,
            true_tox: pick(&self.true_tox, base.as_ref().map(|b| &b.true_tox), "true_tox")?,
            true_eff: pick(&self.true_eff, base.as_ref().map(|b| &b.true_eff), "true_eff")?,
            pk_gen: self.pk_gen.or(base.as_ref().map(|b| b.pk_gen)).ok_or_else(|| required("pk_gen"))?,
            sample_times: self
                .sample_times
                .clone()
                .or_else(|| base.as_ref().map(|b| b.sample_times.clone()))
                .unwrap_or_else(|| pedoop::sim::SAMPLE_TIMES.to_vec()),
            control: self.control.or(base.and_then(|b| b.control)),
        };
        scenario.validate().map_err(|e| at(e.to_string()))?;
        Ok(scenario)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ServiceError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        if cfg.scenarios.is_empty() {
            return Err(ServiceError::Config("at least one [[scenario]] is required".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String), ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Io(format!("reading {}: {e}", path.display())))?;
        let cfg = Self::parse(&text).map_err(|e| match e {
            ServiceError::Config(msg) => ServiceError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        Ok((cfg, text))
    }

    pub fn to_toml(&self) -> Result<String, ServiceError> {
        toml::to_string(self).map_err(|e| ServiceError::Config(format!("serializing config: {e}")))
    }

    /// Resolved scenarios, each checked against the design.
    pub fn scenarios(&self) -> Result<Vec<Scenario>, ServiceError> {
        self.scenarios
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let sc = entry.resolve(i)?;
                self.design.validate(&sc).map_err(|e| ServiceError::Config(format!("scenario[{i}]: {e}")))?;
                Ok(sc)
            })
            .collect()
    }
}
