//! Human and robot clear objects off a table.
//!
//! Each object has a value and may be `robot_only` (too heavy for the
//! human). Both agents choose `pick-i` or `wait`. A pick succeeds when the
//! object is still on the table and the other agent is not picking the same
//! object. A human attempt on a robot-only object always fails and costs
//! `failed_attempt_cost`.
//!
//! Two human types: `aligned` shares the robot's reward; `naive` believes its
//! own attempt on a robot-only object is worth `naive_bonus`. After the robot
//! picks a robot-only object, a naive human becomes aligned with probability
//! `eps_learn`. Humans best-respond to the robot's current action.
//!
//! Every subset of removed objects is reachable: `2^n` states.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{bitmask_space, fill_tables, mask_to_state, parse_params, state_to_mask, unknown_model, Cell, HumanConfig};
use crate::error::{Error, Result};
use crate::game::{GameModel, HumanType, ModelParts, Outcome, RewardModel, Teamwork, TypeSpace};
use crate::human::HumanModel;

pub const DEFAULT_HORIZON: usize = 4;
pub const DEFAULT_EPS_LEARN: f64 = 0.9;
pub const ALIGNED: usize = 0;
pub const NAIVE: usize = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Object {
    pub value: f64,
    #[serde(default)]
    pub robot_only: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub objects: Vec<Object>,
    pub failed_attempt_cost: f64,
    pub naive_bonus: f64,
    /// Initial belief over (aligned, naive); defaults to certainly naive.
    pub prior_naive: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            objects: vec![
                Object { value: 1.0, robot_only: false },
                Object { value: 1.0, robot_only: false },
                Object { value: 2.0, robot_only: true },
            ],
            failed_attempt_cost: 0.5,
            naive_bonus: 5.0,
            prior_naive: 1.0,
        }
    }
}

impl Params {
    fn validate(&self) -> Result<()> {
        if self.objects.is_empty() || self.objects.len() > 12 {
            return Err(Error::params("objects", "need between 1 and 12 objects"));
        }
        if self.objects.iter().any(|o| !o.value.is_finite()) {
            return Err(Error::params("objects", "values must be finite"));
        }
        if !self.failed_attempt_cost.is_finite() || !self.naive_bonus.is_finite() {
            return Err(Error::params("failed_attempt_cost", "costs must be finite"));
        }
        if !(0.0..=1.0).contains(&self.prior_naive) {
            return Err(Error::params("prior_naive", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

pub fn build(params: &Value, horizon: Option<usize>, human: &HumanConfig) -> Result<GameModel> {
    let p: Params = parse_params(params)?;
    p.validate()?;
    let model_name = human.model.as_deref().unwrap_or("best-response");
    if model_name != "best-response" {
        return Err(unknown_model("table-clearing", model_name));
    }
    let eps_learn = human.eps_learn(DEFAULT_EPS_LEARN)?;
    let t_max = horizon.unwrap_or(DEFAULT_HORIZON);
    let k = p.objects.len();
    let space = bitmask_space("removed", k)?;
    let n = space.len();
    let wait = k;
    let full = (1usize << k) - 1;
    let terminal: Vec<bool> = (0..n).map(|s| state_to_mask(s, k) == full).collect();

    let tables = fill_tables(n, k + 1, k + 1, 2, |s, a_r, a_h| {
        let mask = state_to_mask(s, k);
        let present = |i: usize| i < k && mask & (1 << i) == 0;
        let mut removed = mask;
        let mut gain = 0.0;
        if present(a_r) && a_h != a_r {
            removed |= 1 << a_r;
            gain += p.objects[a_r].value;
        }
        let mut attempt = 0.0;
        let mut naive_attempt = 0.0;
        if present(a_h) {
            if p.objects[a_h].robot_only {
                attempt = p.failed_attempt_cost;
                naive_attempt = p.naive_bonus;
            } else if a_h != a_r {
                removed |= 1 << a_h;
                gain += p.objects[a_h].value;
            }
        }
        let robot = gain - attempt;
        let disagree = (a_r != wait && a_r == a_h) || attempt > 0.0;
        Cell { next: mask_to_state(removed, k), robot, human: vec![robot, gain + naive_attempt], trust: 0.0, disagree }
    });

    let informative: Vec<bool> = (0..=k).map(|a| a < k && p.objects[a].robot_only).collect();
    let types = vec![
        HumanType { id: ALIGNED, label: "aligned".into(), adaptability: 1.0, reward_param: 0 },
        HumanType { id: NAIVE, label: "naive".into(), adaptability: eps_learn, reward_param: 1 },
    ];
    let kernel = vec![
        vec![vec![1.0, 0.0]; k + 1],
        informative.iter().map(|inf| if *inf { vec![eps_learn, 1.0 - eps_learn] } else { vec![0.0, 1.0] }).collect(),
    ];
    let types = TypeSpace::with_kernel(types, kernel)?;
    let outcome = terminal.iter().map(|t| if *t { Outcome::Complete } else { Outcome::Ongoing }).collect();
    let state_class = (0..n).map(|s| state_to_mask(s, k).count_ones() as usize).collect();
    let mut actions: Vec<String> = (0..k).map(|i| format!("pick-{i}")).collect();
    actions.push("wait".into());
    GameModel::new(ModelParts {
        env: "table-clearing".into(),
        rewards: RewardModel::new(
            n,
            k + 1,
            k + 1,
            tables.robot,
            tables.human,
            Some(tables.trust),
            vec!["aligned".into(), "naive".into()],
        )?,
        space,
        robot_actions: actions.clone(),
        human_actions: actions,
        next: tables.next,
        terminal,
        types,
        horizon: t_max,
        human_model: HumanModel::BestResponse,
        teamwork: Teamwork::EqualPartners,
        start: 0,
        initial_belief: vec![1.0 - p.prior_naive, p.prior_naive],
        disagreement: tables.disagreement,
        outcome,
        state_class,
        plans: Vec::new(),
        role_swap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::human::best_response;

    fn model() -> GameModel {
        build(&Value::Null, None, &HumanConfig::default()).unwrap()
    }

    #[test]
    fn all_subsets_reachable() {
        assert_eq!(model().reachable_states().len(), 8);
    }

    #[test]
    fn joint_pick_fails() {
        let m = model();
        assert_eq!(m.next_state(0, 0, 0), 0);
        assert_eq!(m.rewards().robot(0, 0, 0), 0.0);
        assert!(m.disagree(0, 0, 0));
    }

    #[test]
    fn naive_human_attempts_heavy_object() {
        let m = model();
        assert_eq!(best_response(&m, 0, 0, 1), 2);
        assert_eq!(best_response(&m, 0, 2, 1), 2);
        assert_eq!(best_response(&m, 0, 2, 0), 0);
        assert_eq!(m.rewards().robot(0, 0, 2), 0.5);
        assert_eq!(m.rewards().robot(0, 2, 2), -0.5);
    }

    #[test]
    fn informative_action_drives_kernel() {
        let m = model();
        let row = m.types().transition_row(NAIVE, 2);
        assert!((row[0] - 0.9).abs() < 1e-12 && (row[1] - 0.1).abs() < 1e-12);
        assert_eq!(m.types().transition_row(NAIVE, 0), &[0.0, 1.0]);
        assert_eq!(m.types().transition_row(ALIGNED, 2), &[1.0, 0.0]);
    }
}
