//! Two agents carry a table and must agree on the rotation direction.
//!
//! The state is `(orientation, step)` with `orientation ∈ 0..n_rot` and
//! `step ∈ 0..=T`. Both agents choose among `rotate-cw`, `rotate-ccw` and
//! `hold`; the table only turns when both pick the same rotation. The robot
//! prefers the goal `goal_offset` steps clockwise from the start, the human
//! the one `goal_offset` steps counter-clockwise.
//!
//! Reachable states from the start, with `G = goal_offset`:
//! `Σ_{s=0..T} (2·min(s, G−1) + 1) + 2·max(T − G + 1, 0)`.

use serde::Deserialize;
use serde_json::Value;

use super::{bam_setup, fill_tables, parse_params, plan_types, unknown_model, Cell, HumanConfig};
use crate::error::{Error, Result};
use crate::game::{GameModel, ModelParts, Outcome, RewardModel, StateSpace, Teamwork};
use crate::human::ModalPlan;

pub const CW: usize = 0;
pub const CCW: usize = 1;
pub const HOLD: usize = 2;
pub const DEFAULT_HORIZON: usize = 8;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub n_rot: u32,
    pub goal_offset: u32,
    pub start: u32,
    pub robot_goal_reward: f64,
    pub human_goal_reward: f64,
    pub step_cost: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { n_rot: 8, goal_offset: 2, start: 0, robot_goal_reward: 10.0, human_goal_reward: 5.0, step_cost: 1.0 }
    }
}

impl Params {
    fn validate(&self) -> Result<()> {
        if self.n_rot < 3 {
            return Err(Error::params("n_rot", "need at least 3 orientations"));
        }
        if self.goal_offset == 0 || 2 * self.goal_offset >= self.n_rot {
            return Err(Error::params("goal_offset", "must satisfy 1 <= goal_offset < n_rot / 2"));
        }
        if self.start >= self.n_rot {
            return Err(Error::params("start", "must be below n_rot"));
        }
        for (name, v) in [
            ("robot_goal_reward", self.robot_goal_reward),
            ("human_goal_reward", self.human_goal_reward),
            ("step_cost", self.step_cost),
        ] {
            if !v.is_finite() {
                return Err(Error::params(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn cw_goal(&self) -> u32 {
        (self.start + self.goal_offset) % self.n_rot
    }

    pub fn ccw_goal(&self) -> u32 {
        (self.start + self.n_rot - self.goal_offset) % self.n_rot
    }
}

/// Analytic count of states reachable from the start within `horizon` steps.
pub fn reachable_count(p: &Params, horizon: usize) -> usize {
    let g = p.goal_offset as usize;
    let inner: usize = (0..=horizon).map(|s| 2 * s.min(g - 1) + 1).sum();
    inner + 2 * (horizon + 1).saturating_sub(g)
}

pub fn build(params: &Value, horizon: Option<usize>, human: &HumanConfig) -> Result<GameModel> {
    let p: Params = parse_params(params)?;
    p.validate()?;
    let t_max = horizon.unwrap_or(DEFAULT_HORIZON);
    let space = StateSpace::new(&[("orientation", p.n_rot), ("step", t_max as u32 + 1)])?;
    let n = space.len();
    let steps = t_max + 1;
    let idx = |o: u32, st: usize| o as usize * steps + st;
    let (cw_goal, ccw_goal) = (p.cw_goal(), p.ccw_goal());
    let is_goal = |o: u32| o == cw_goal || o == ccw_goal;
    let terminal: Vec<bool> = space.iter().map(|w| w.0[1] as usize == t_max || is_goal(w.0[0])).collect();

    let tables = fill_tables(n, 3, 3, 2, |s, a_r, a_h| {
        let w = space.state(s);
        let (o, st) = (w.0[0], w.0[1] as usize);
        let o2 = match (a_r, a_h) {
            (CW, CW) => (o + 1) % p.n_rot,
            (CCW, CCW) => (o + p.n_rot - 1) % p.n_rot,
            _ => o,
        };
        let next = idx(o2, (st + 1).min(t_max));
        let (robot, human) = if o2 == cw_goal {
            (p.robot_goal_reward, p.human_goal_reward)
        } else if o2 == ccw_goal {
            (p.human_goal_reward, p.robot_goal_reward)
        } else {
            (0.0, 0.0)
        };
        Cell {
            next,
            robot: robot - p.step_cost,
            // param 0 prefers the counter-clockwise goal, param 1 shares the robot's preference
            human: vec![human - p.step_cost, robot - p.step_cost],
            trust: 0.0,
            disagree: a_r != a_h,
        }
    });

    let plans: Vec<ModalPlan> = [(CCW, "ccw", 0), (CW, "cw", 1)]
        .into_iter()
        .enumerate()
        .map(|(id, (a, label, reward_param))| ModalPlan {
            id,
            label: label.to_string(),
            human_action: vec![a; n],
            robot_signature: vec![1u64 << a; n],
            reward_param,
        })
        .collect();

    let model_name = human.model.as_deref().unwrap_or("bam");
    let (types, human_model) = match model_name {
        "bam" => bam_setup(human, &plans, 0, 3)?,
        "fixed" => plan_types(&plans, n, 3, 3),
        other => return Err(unknown_model("table-carrying", other)),
    };
    let outcome = space
        .iter()
        .map(|w| match w.0[0] {
            o if o == cw_goal => Outcome::RobotGoal,
            o if o == ccw_goal => Outcome::HumanGoal,
            _ if w.0[1] as usize == t_max => Outcome::Timeout,
            _ => Outcome::Ongoing,
        })
        .collect();
    let state_class = space.iter().map(|w| w.0[0] as usize).collect();
    let n_types = types.len();
    GameModel::new(ModelParts {
        env: "table-carrying".into(),
        rewards: RewardModel::new(
            n,
            3,
            3,
            tables.robot,
            tables.human,
            Some(tables.trust),
            vec!["prefers-ccw".into(), "prefers-cw".into()],
        )?,
        space,
        robot_actions: vec!["rotate-cw".into(), "rotate-ccw".into(), "hold".into()],
        human_actions: vec!["rotate-cw".into(), "rotate-ccw".into(), "hold".into()],
        next: tables.next,
        terminal,
        types,
        horizon: t_max,
        human_model,
        teamwork: Teamwork::EqualPartners,
        start: idx(p.start, 0),
        initial_belief: vec![1.0 / n_types as f64; n_types],
        disagreement: tables.disagreement,
        outcome,
        state_class,
        plans,
        role_swap: None,
    })
}
