//! Versioned on-disk form of a solved policy.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::exact::{NodeEntry, NodeKey, Solution, SolveOptions};
use super::{assistant_model, RobotPolicy};
use crate::envs::{EnvConfig, HumanConfig};
use crate::error::{Error, Result};
use crate::game::{Belief, GameModel, History, HumanContext};

pub const POLICY_FILE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub x: usize,
    pub t: usize,
    pub plan: Option<usize>,
    pub history: Vec<(usize, usize)>,
    pub belief: Vec<f64>,
    pub action: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub version: u32,
    pub provenance: String,
    pub environment: EnvConfig,
    pub human_model: HumanConfig,
    pub initial_belief: Vec<f64>,
    pub node_cap: usize,
    pub value: Option<f64>,
    pub entries: Vec<PolicyEntry>,
}

fn entries_of(solution: &Solution) -> Vec<PolicyEntry> {
    solution
        .entries
        .iter()
        .map(|(k, e)| PolicyEntry {
            x: k.x,
            t: k.t,
            plan: k.ctx.plan,
            history: k.ctx.history.iter().copied().collect(),
            belief: e.belief.probs().to_vec(),
            action: e.action,
            value: e.value,
        })
        .collect()
}

fn solution_of(model: &GameModel, entries: &[PolicyEntry], value: f64) -> Result<Solution> {
    let capacity = model.human_model().initial_context().history.capacity();
    let mut sol = Solution { value, ..Default::default() };
    for e in entries {
        if e.x >= model.n_states() || e.action >= model.n_robot() {
            return Err(Error::model("policy entry does not fit the model"));
        }
        let belief = Belief::new(e.belief.clone())?;
        let ctx = HumanContext { history: History::from_entries(capacity, e.history.iter().copied()), plan: e.plan };
        let key = NodeKey::new(e.x, &ctx, &belief, e.t);
        if sol.root.as_ref().is_none_or(|r| r.t < e.t) {
            sol.root = Some(key.clone());
        }
        sol.entries.insert(key, NodeEntry { belief, action: e.action, value: e.value });
    }
    Ok(sol)
}

impl PolicyFile {
    pub fn from_policy(policy: &RobotPolicy, env: &EnvConfig, human: &HumanConfig, b0: &Belief) -> Self {
        let (entries, node_cap) = match policy {
            RobotPolicy::Exact { solution, opts } | RobotPolicy::RobotAdaptationOnly { solution, opts, .. } => {
                (entries_of(solution), opts.node_cap)
            }
            RobotPolicy::NoAdaptation { table } => (
                table
                    .iter()
                    .enumerate()
                    .skip(1)
                    .flat_map(|(t, row)| {
                        row.iter().enumerate().map(move |(x, a)| PolicyEntry {
                            x,
                            t,
                            plan: None,
                            history: Vec::new(),
                            belief: Vec::new(),
                            action: *a,
                            value: 0.0,
                        })
                    })
                    .collect(),
                SolveOptions::default().node_cap,
            ),
        };
        PolicyFile {
            version: POLICY_FILE_VERSION,
            provenance: policy.provenance().to_string(),
            environment: env.clone(),
            human_model: human.clone(),
            initial_belief: b0.probs().to_vec(),
            node_cap,
            value: policy.value(),
            entries,
        }
    }

    /// Rebuilds the policy against `model` (built from the same configs).
    pub fn to_policy(&self, model: &GameModel) -> Result<RobotPolicy> {
        if self.version != POLICY_FILE_VERSION {
            return Err(Error::params("version", format!("unsupported policy file version {}", self.version)));
        }
        let opts = SolveOptions { node_cap: self.node_cap };
        let value = self.value.unwrap_or(0.0);
        match self.provenance.as_str() {
            "exact-dp" => Ok(RobotPolicy::Exact { solution: solution_of(model, &self.entries, value)?, opts }),
            "robot-adaptation-only" => {
                let derived = assistant_model(model)?;
                let solution = solution_of(&derived, &self.entries, value)?;
                Ok(RobotPolicy::RobotAdaptationOnly { derived: Arc::new(derived), solution, opts })
            }
            "no-adaptation" => {
                let mut table = vec![vec![0; model.n_states()]; model.horizon() + 1];
                for e in &self.entries {
                    if e.t > model.horizon() || e.x >= model.n_states() {
                        return Err(Error::model("policy entry does not fit the model"));
                    }
                    table[e.t][e.x] = e.action;
                }
                Ok(RobotPolicy::NoAdaptation { table })
            }
            other => Err(Error::params("provenance", format!("unknown policy provenance `{other}`"))),
        }
    }
}
