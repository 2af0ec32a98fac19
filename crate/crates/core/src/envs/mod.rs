//! Concrete task environments.
//!
//! | name               | state                        | default human model |
//! |--------------------|------------------------------|---------------------|
//! | `table-carrying`   | (orientation, step)          | `bam`               |
//! | `shared-autonomy`  | (row, col) of the arm        | `bam`               |
//! | `table-clearing`   | removed flag per object      | `best-response`     |
//! | `assembly`         | completed flag per task      | `fixed`             |

pub mod assembly;
pub mod shared_autonomy;
pub mod table_carrying;
pub mod table_clearing;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::game::{GameModel, HumanType, StateSpace, TypeSpace};
use crate::human::{BamModel, FixedPolicies, HumanModel, ModalPlan, DEFAULT_EPS_PLAN, DEFAULT_MEMORY};

pub const ENV_NAMES: [&str; 4] = ["table-carrying", "shared-autonomy", "table-clearing", "assembly"];

pub const DEFAULT_ALPHA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// `{"env": name, "params": {...}, "horizon": T}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub env: String,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl EnvConfig {
    pub fn named(env: &str) -> Self {
        EnvConfig { env: env.to_string(), params: empty_object(), horizon: None }
    }

    pub fn with_horizon(mut self, t: usize) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }
}

/// `{"model": "bam"|"best-response"|"fixed", "k", "alpha_grid", "eps_learn", "eps_plan"}`
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_learn: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_plan: Option<f64>,
}

impl HumanConfig {
    pub fn model(name: &str) -> Self {
        HumanConfig { model: Some(name.to_string()), ..Default::default() }
    }

    pub(crate) fn alpha_grid(&self) -> Result<Vec<f64>> {
        let grid = self.alpha_grid.clone().unwrap_or_else(|| DEFAULT_ALPHA_GRID.to_vec());
        if grid.is_empty() {
            return Err(Error::params("alpha_grid", "must not be empty"));
        }
        if grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::params("alpha_grid", "values must lie in [0, 1]"));
        }
        Ok(grid)
    }

    pub(crate) fn eps_plan(&self) -> Result<f64> {
        let e = self.eps_plan.unwrap_or(DEFAULT_EPS_PLAN);
        if !(0.0..1.0).contains(&e) {
            return Err(Error::params("eps_plan", "must lie in [0, 1)"));
        }
        Ok(e)
    }

    pub(crate) fn k(&self) -> Result<usize> {
        match self.k.unwrap_or(DEFAULT_MEMORY) {
            0 => Err(Error::params("k", "memory size must be at least 1")),
            k => Ok(k),
        }
    }

    pub(crate) fn eps_learn(&self, default: f64) -> Result<f64> {
        let e = self.eps_learn.unwrap_or(default);
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::params("eps_learn", "must lie in [0, 1]"));
        }
        Ok(e)
    }
}

/// Builds an environment with its default human model.
pub fn build_env(name: &str, params: &Value, horizon: Option<usize>) -> Result<GameModel> {
    build_model(&EnvConfig { env: name.to_string(), params: params.clone(), horizon }, &HumanConfig::default())
}

pub fn build_model(env: &EnvConfig, human: &HumanConfig) -> Result<GameModel> {
    if env.horizon == Some(0) {
        return Err(Error::params("horizon", "must be at least 1"));
    }
    match env.env.as_str() {
        "table-carrying" => table_carrying::build(&env.params, env.horizon, human),
        "shared-autonomy" => shared_autonomy::build(&env.params, env.horizon, human),
        "table-clearing" => table_clearing::build(&env.params, env.horizon, human),
        "assembly" => assembly::build(&env.params, env.horizon, human),
        other => Err(Error::UnknownEnvironment(other.to_string())),
    }
}

/// Deserializes a params block, naming the offending field on failure.
pub(crate) fn parse_params<T: DeserializeOwned>(params: &Value) -> Result<T> {
    let v = if params.is_null() { empty_object() } else { params.clone() };
    serde_json::from_value(v).map_err(|e| {
        let msg = e.to_string();
        let field = msg.split('`').nth(1).unwrap_or("params").to_string();
        Error::params(field, msg)
    })
}

/// Dense next-state and flag tables filled from a per-cell closure.
pub(crate) struct Tables {
    pub next: Vec<usize>,
    pub robot: Vec<f64>,
    pub human: Vec<Vec<f64>>,
    pub trust: Vec<f64>,
    pub disagreement: Vec<bool>,
}

pub(crate) struct Cell {
    pub next: usize,
    pub robot: f64,
    pub human: Vec<f64>,
    pub trust: f64,
    pub disagree: bool,
}

pub(crate) fn fill_tables(
    n_states: usize,
    n_robot: usize,
    n_human: usize,
    n_params: usize,
    f: impl Fn(usize, usize, usize) -> Cell,
) -> Tables {
    let len = n_states * n_robot * n_human;
    let mut t = Tables {
        next: Vec::with_capacity(len),
        robot: Vec::with_capacity(len),
        human: vec![Vec::with_capacity(len); n_params],
        trust: Vec::with_capacity(len),
        disagreement: Vec::with_capacity(len),
    };
    for s in 0..n_states {
        for a_r in 0..n_robot {
            for a_h in 0..n_human {
                let c = f(s, a_r, a_h);
                t.next.push(c.next);
                t.robot.push(c.robot);
                for (p, v) in c.human.into_iter().enumerate() {
                    t.human[p].push(v);
                }
                t.trust.push(c.trust);
                t.disagreement.push(c.disagree);
            }
        }
    }
    t
}

/// Plan-following human types over an adaptability grid.
pub(crate) fn bam_setup(
    human: &HumanConfig,
    plans: &[ModalPlan],
    reward_param: usize,
    n_robot: usize,
) -> Result<(TypeSpace, HumanModel)> {
    let types = human
        .alpha_grid()?
        .into_iter()
        .enumerate()
        .map(|(id, a)| HumanType { id, label: format!("alpha={a}"), adaptability: a, reward_param })
        .collect();
    let bam = BamModel { plans: plans.to_vec(), k: human.k()?, eps_plan: human.eps_plan()?, initial_plan: 0 };
    Ok((TypeSpace::fixed(types, n_robot), HumanModel::Bam(bam)))
}

/// One deterministic type per plan, each preferring its plan's reward.
pub(crate) fn plan_types(
    plans: &[ModalPlan],
    n_states: usize,
    n_robot: usize,
    n_human: usize,
) -> (TypeSpace, HumanModel) {
    let types = plans
        .iter()
        .enumerate()
        .map(|(id, p)| HumanType { id, label: p.label.clone(), adaptability: 0.0, reward_param: p.reward_param })
        .collect();
    let tables = plans
        .iter()
        .map(|p| {
            let mut t = vec![0.0; n_states * n_human];
            for s in 0..n_states {
                t[s * n_human + p.human_action[s]] = 1.0;
            }
            t
        })
        .collect();
    (TypeSpace::fixed(types, n_robot), HumanModel::Fixed(FixedPolicies { n_human, tables }))
}

pub(crate) fn bitmask_space(prefix: &str, n: usize) -> Result<StateSpace> {
    let names: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let comps: Vec<(&str, u32)> = names.iter().map(|s| (s.as_str(), 2)).collect();
    StateSpace::new(&comps)
}

/// Bitmask index -> mixed-radix state index for a space of binary flags.
pub(crate) fn mask_to_state(mask: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, i| acc * 2 + ((mask >> i) & 1))
}

pub(crate) fn state_to_mask(s: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, i| acc | (((s >> (n - 1 - i)) & 1) << i))
}

pub(crate) fn unknown_model(env: &str, model: &str) -> Error {
    Error::params("model", format!("human model `{model}` is not available for `{env}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_roundtrip() {
        for m in 0..16 {
            assert_eq!(state_to_mask(mask_to_state(m, 4), 4), m);
        }
    }

    #[test]
    fn unknown_environment() {
        let err = build_env("kitchen", &Value::Null, None).unwrap_err();
        assert!(matches!(err, Error::UnknownEnvironment(ref n) if n == "kitchen"));
    }

    #[test]
    fn unknown_param_names_field() {
        let err = build_env("table-carrying", &serde_json::json!({"n_rotations": 8}), None).unwrap_err();
        assert!(matches!(err, Error::InvalidParams { ref field, .. } if field == "n_rotations"));
    }

    #[test]
    fn every_env_is_closed_and_absorbing() {
        for name in ENV_NAMES {
            let m = build_env(name, &Value::Null, None).unwrap();
            for s in 0..m.n_states() {
                for a_r in 0..m.n_robot() {
                    for a_h in 0..m.n_human() {
                        let n = m.next_state(s, a_r, a_h);
                        assert!(n < m.n_states());
                        if m.is_terminal(s) {
                            assert_eq!(n, s);
                            assert_eq!(m.rewards().robot(s, a_r, a_h), 0.0);
                            for p in 0..m.rewards().param_count() {
                                assert_eq!(m.rewards().human(p, s, a_r, a_h), 0.0);
                            }
                        }
                    }
                }
            }
        }
    }
}
