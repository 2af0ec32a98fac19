//! Experiment configuration: one JSON document plus dotted `key=value`
//! overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::envs::{build_model, parse_params, EnvConfig, HumanConfig};
use crate::error::{Error, Result};
use crate::game::{Belief, GameModel};
use crate::harness::PopulationConfig;
use crate::planner::{Condition, SolveOptions, DEFAULT_NODE_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    /// Prior over types; the environment default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_belief: Option<Vec<f64>>,
    pub node_cap: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { initial_belief: None, node_cap: DEFAULT_NODE_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub condition: String,
    /// True type of the simulated human; drawn from the prior when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_type: Option<usize>,
    pub episodes: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { condition: Condition::MutualAdaptation.to_string(), true_type: None, episodes: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossTrainConfig {
    pub planted: usize,
    pub rounds: usize,
}

impl Default for CrossTrainConfig {
    fn default() -> Self {
        CrossTrainConfig { planted: 0, rounds: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub k: usize,
    /// Planted types of the simulated training population.
    pub planted: Vec<usize>,
    pub demos_per_type: usize,
    /// Demonstrations to cluster instead of simulated ones (JSONL).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demos: Option<PathBuf>,
    pub smoothing: f64,
    pub held_out: usize,
    pub threshold: f64,
    pub max_steps: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            k: 3,
            planted: vec![0, 1, 2],
            demos_per_type: 20,
            demos: None,
            smoothing: 1.0,
            held_out: 200,
            threshold: 0.9,
            max_steps: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub environment: EnvConfig,
    #[serde(default)]
    pub human_model: HumanConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub cross_train: CrossTrainConfig,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Sets `path` (dot-separated) in `doc` to `raw`, parsed as JSON when
/// possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) =
        assignment.split_once('=').ok_or_else(|| Error::params(assignment, "override must look like key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::params(path, "empty key in override path"));
    }
    let mut cur = doc;
    for k in &keys[..keys.len() - 1] {
        if !cur.is_object() {
            return Err(Error::params(path, format!("`{k}` is not inside an object")));
        }
        cur = cur
            .as_object_mut()
            .expect("checked above")
            .entry(k.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    match cur.as_object_mut() {
        Some(obj) => {
            obj.insert(keys[keys.len() - 1].to_string(), value);
            Ok(())
        }
        None => Err(Error::params(path, "override target is not inside an object")),
    }
}

impl Config {
    pub fn from_value(doc: Value) -> Result<Config> {
        if !doc.is_object() {
            return Err(Error::params("config", "top level must be a JSON object"));
        }
        parse_params(&doc)
    }

    pub fn from_json(text: &str, overrides: &[String]) -> Result<Config> {
        let mut doc: Value = serde_json::from_str(text)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Config::from_value(doc)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Config> {
        Config::from_json(&std::fs::read_to_string(path)?, overrides)
    }

    pub fn model(&self) -> Result<GameModel> {
        build_model(&self.environment, &self.human_model)
    }

    pub fn solve_options(&self) -> Result<SolveOptions> {
        if self.planner.node_cap == 0 {
            return Err(Error::params("node_cap", "must be at least 1"));
        }
        Ok(SolveOptions { node_cap: self.planner.node_cap })
    }

    pub fn initial_belief(&self, model: &GameModel) -> Result<Belief> {
        match &self.planner.initial_belief {
            None => Belief::new(model.initial_belief().to_vec()),
            Some(b) if b.len() != model.types().len() => {
                Err(Error::params("initial_belief", format!("need {} entries", model.types().len())))
            }
            Some(b) => Belief::new(b.clone()).map_err(|e| Error::params("initial_belief", e.to_string())),
        }
    }
}
