//! Assembly task with a human worker and a robot assistant.
//!
//! The state records which of `n_tasks` steps are done. The human performs
//! `do-i`; the robot prepares the part for a step with `prepare-i`. Steps
//! must respect the `precedence` pairs `[a, b]` (a before b). Each candidate
//! order in `orders` is one human preference; a human of preference `y`
//! performs the first unfinished step of order `y` with probability
//! `1 − noise` and otherwise a uniformly random legal step.
//!
//! The robot assists (`R^R ≡ R^H`): reward
//! `w_agree·[aR = aH, aH legal] + w_pref·[aR = next_y(x)]`.
//!
//! In role-swapped execution the human prepares parts and the robot performs
//! the prepared step. Every subset closed under precedence is a state;
//! without precedence all `2^n` subsets are reachable.

use serde::Deserialize;
use serde_json::Value;

use super::{bitmask_space, fill_tables, mask_to_state, parse_params, state_to_mask, unknown_model, Cell, HumanConfig};
use crate::error::{Error, Result};
use crate::game::{GameModel, HumanType, ModelParts, Outcome, RewardModel, RoleSwap, Teamwork, TypeSpace};
use crate::human::{FixedPolicies, HumanModel};

pub const DEFAULT_HORIZON: usize = 4;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub n_tasks: usize,
    pub orders: Vec<Vec<usize>>,
    pub precedence: Vec<[usize; 2]>,
    pub noise: f64,
    pub w_agree: f64,
    pub w_pref: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n_tasks: 4,
            orders: vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![3, 2, 1, 0]],
            precedence: Vec::new(),
            noise: 0.1,
            w_agree: 0.6,
            w_pref: 0.4,
        }
    }
}

impl Params {
    fn validate(&self) -> Result<()> {
        let n = self.n_tasks;
        if n == 0 || n > 12 {
            return Err(Error::params("n_tasks", "need between 1 and 12 tasks"));
        }
        if self.orders.is_empty() {
            return Err(Error::params("orders", "need at least one candidate order"));
        }
        for pair in &self.precedence {
            if pair[0] >= n || pair[1] >= n || pair[0] == pair[1] {
                return Err(Error::params("precedence", format!("bad pair {pair:?}")));
            }
        }
        for o in &self.orders {
            let mut seen = vec![false; n];
            if o.len() != n || o.iter().any(|t| *t >= n || std::mem::replace(&mut seen[*t], true)) {
                return Err(Error::params("orders", format!("{o:?} is not a permutation of 0..{n}")));
            }
            let pos = |t: usize| o.iter().position(|x| *x == t).unwrap();
            if self.precedence.iter().any(|[a, b]| pos(*a) > pos(*b)) {
                return Err(Error::params("orders", format!("{o:?} violates precedence")));
            }
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::params("noise", "must lie in [0, 1]"));
        }
        if !self.w_agree.is_finite() || !self.w_pref.is_finite() {
            return Err(Error::params("w_agree", "weights must be finite"));
        }
        Ok(())
    }

    pub fn legal(&self, mask: usize, task: usize) -> bool {
        task < self.n_tasks
            && mask & (1 << task) == 0
            && self.precedence.iter().all(|[a, b]| *b != task || mask & (1 << a) != 0)
    }
}

/// First unfinished step of `order`.
pub fn next_in_order(order: &[usize], mask: usize) -> Option<usize> {
    order.iter().copied().find(|t| mask & (1 << t) == 0)
}

/// Demonstrator noise model: `(1 − ε)·[a = next] + ε / |legal|` over legal steps.
pub fn preference_policy(legal: &[bool], next: Option<usize>, noise: f64) -> Vec<f64> {
    let n_legal = legal.iter().filter(|l| **l).count();
    let mut row = vec![0.0; legal.len()];
    match next {
        Some(nx) if n_legal > 0 => {
            for (a, l) in legal.iter().enumerate() {
                if *l {
                    row[a] = noise / n_legal as f64;
                }
            }
            row[nx] += 1.0 - noise;
        }
        _ => row[0] = 1.0,
    }
    row
}

pub fn build(params: &Value, horizon: Option<usize>, human: &HumanConfig) -> Result<GameModel> {
    let p: Params = parse_params(params)?;
    p.validate()?;
    let model_name = human.model.as_deref().unwrap_or("fixed");
    if model_name != "fixed" {
        return Err(unknown_model("assembly", model_name));
    }
    let k = p.n_tasks;
    let t_max = horizon.unwrap_or(DEFAULT_HORIZON);
    let space = bitmask_space("done", k)?;
    let n = space.len();
    let full = (1usize << k) - 1;
    let terminal: Vec<bool> = (0..n).map(|s| state_to_mask(s, k) == full).collect();
    let n_params = p.orders.len();

    let tables = fill_tables(n, k, k, n_params, |s, a_r, a_h| {
        let mask = state_to_mask(s, k);
        let legal = p.legal(mask, a_h);
        let next = if legal { mask_to_state(mask | (1 << a_h), k) } else { s };
        let agree = if a_r == a_h && legal { p.w_agree } else { 0.0 };
        let human: Vec<f64> =
            p.orders.iter().map(|o| agree + if next_in_order(o, mask) == Some(a_r) { p.w_pref } else { 0.0 }).collect();
        Cell { next, robot: human[0], human, trust: 0.0, disagree: a_r != a_h }
    });

    let types: Vec<HumanType> = p
        .orders
        .iter()
        .enumerate()
        .map(|(id, o)| HumanType {
            id,
            label: format!("order-{}", o.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("")),
            adaptability: 0.0,
            reward_param: id,
        })
        .collect();
    let tables_h = p
        .orders
        .iter()
        .map(|o| {
            (0..n)
                .flat_map(|s| {
                    let mask = state_to_mask(s, k);
                    let legal: Vec<bool> = (0..k).map(|a| p.legal(mask, a)).collect();
                    preference_policy(&legal, next_in_order(o, mask), p.noise)
                })
                .collect()
        })
        .collect();
    let outcome = terminal.iter().map(|t| if *t { Outcome::Complete } else { Outcome::Ongoing }).collect();
    let state_class = (0..n).map(|s| state_to_mask(s, k).count_ones() as usize).collect();
    GameModel::new(ModelParts {
        env: "assembly".into(),
        rewards: RewardModel::new(
            n,
            k,
            k,
            tables.robot,
            tables.human,
            Some(tables.trust),
            types.iter().map(|t| t.label.clone()).collect(),
        )?,
        space,
        robot_actions: (0..k).map(|i| format!("prepare-{i}")).collect(),
        human_actions: (0..k).map(|i| format!("do-{i}")).collect(),
        next: tables.next,
        terminal,
        types: TypeSpace::fixed(types, k),
        horizon: t_max,
        human_model: HumanModel::Fixed(FixedPolicies { n_human: k, tables: tables_h }),
        teamwork: Teamwork::LeaderAssistant,
        start: 0,
        initial_belief: vec![1.0 / n_params as f64; n_params],
        disagreement: tables.disagreement,
        outcome,
        state_class,
        plans: Vec::new(),
        role_swap: Some(RoleSwap { orders: p.orders.clone(), precedence: p.precedence.clone(), noise: p.noise }),
    })
}

impl RoleSwap {
    /// Legal steps in state `s` of a model with `n_tasks` binary flags.
    pub fn legal_steps(&self, s: usize, n_tasks: usize) -> Vec<bool> {
        let mask = state_to_mask(s, n_tasks);
        (0..n_tasks)
            .map(|t| mask & (1 << t) == 0 && self.precedence.iter().all(|[a, b]| *b != t || mask & (1 << a) != 0))
            .collect()
    }

    /// Next step of preference `y` in state `s`.
    pub fn next_step(&self, y: usize, s: usize, n_tasks: usize) -> Option<usize> {
        next_in_order(&self.orders[y], state_to_mask(s, n_tasks))
    }

    /// Demonstrator distribution over steps for preference `y` in state `s`.
    pub fn policy(&self, y: usize, s: usize, n_tasks: usize) -> Vec<f64> {
        preference_policy(&self.legal_steps(s, n_tasks), self.next_step(y, s, n_tasks), self.noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::human::fixed_policy;

    fn model() -> GameModel {
        build(&Value::Null, None, &HumanConfig::default()).unwrap()
    }

    #[test]
    fn leader_assistant_rewards_match() {
        let m = model();
        for s in 0..m.n_states() {
            for a in 0..4 {
                for b in 0..4 {
                    for y in 0..3 {
                        assert_eq!(m.robot_reward(s, a, b, y), m.human_reward(s, a, b, y));
                    }
                }
            }
        }
    }

    #[test]
    fn preference_policy_rows() {
        let m = model();
        let HumanModel::Fixed(f) = m.human_model() else { panic!() };
        let row = fixed_policy(f, m.start(), 1);
        assert!((row[1] - (0.9 + 0.025)).abs() < 1e-12);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reaches_completion() {
        let m = model();
        let mut s = m.start();
        for t in [3, 2, 1, 0] {
            s = m.next_state(s, t, t);
        }
        assert!(m.is_terminal(s));
        assert_eq!(m.reachable_states().len(), 16);
    }

    #[test]
    fn precedence_is_enforced() {
        let m = build(
            &serde_json::json!({"precedence": [[0, 2]], "orders": [[0, 1, 2, 3]]}),
            None,
            &HumanConfig::default(),
        )
        .unwrap();
        assert_eq!(m.next_state(m.start(), 2, 2), m.start());
        let bad = build(&serde_json::json!({"precedence": [[0, 2]]}), None, &HumanConfig::default());
        assert!(bad.is_err());
    }
}
