//! Assistive arm driven by joystick input.
//!
//! The arm lives on a `rows × cols` grid and starts at `(0, start_col)`. The
//! robot executes `left`, `straight` or `right`; the human pushes the
//! joystick `left` or `right`. Only the robot's action moves the arm.
//! Goals sit at `(rows−1, 0)` (the human's bottle) and `(rows−1, cols−1)`
//! (the robot's bottle) and are absorbing.
//!
//! Logged robot reward is `−step_cost` per step plus `robot_goal_reward` at
//! the right goal or `human_goal_reward` at the left one; the human reward is
//! mirrored. Planning additionally charges a trust cost: `trust_step_cost`
//! per step where the motion contradicts the joystick and
//! `trust_goal_penalty` for reaching a goal against the joystick.
//!
//! On a single row every cell is reachable, so the reachable count is `cols`.

use serde::Deserialize;
use serde_json::Value;

use super::{bam_setup, fill_tables, parse_params, plan_types, unknown_model, Cell, HumanConfig};
use crate::error::{Error, Result};
use crate::game::{GameModel, ModelParts, Outcome, RewardModel, StateSpace, Teamwork};
use crate::human::ModalPlan;

pub const LEFT: usize = 0;
pub const STRAIGHT: usize = 1;
pub const RIGHT: usize = 2;
pub const JOY_LEFT: usize = 0;
pub const JOY_RIGHT: usize = 1;
pub const DEFAULT_HORIZON: usize = 10;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub rows: u32,
    pub cols: u32,
    /// Defaults to the middle column.
    pub start_col: Option<u32>,
    pub robot_goal_reward: f64,
    pub human_goal_reward: f64,
    pub step_cost: f64,
    pub trust_step_cost: f64,
    pub trust_goal_penalty: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            rows: 1,
            cols: 9,
            start_col: None,
            robot_goal_reward: 10.0,
            human_goal_reward: 5.0,
            step_cost: 1.0,
            trust_step_cost: 1.0,
            trust_goal_penalty: 10.0,
        }
    }
}

impl Params {
    pub fn start_col(&self) -> u32 {
        self.start_col.unwrap_or(self.cols / 2)
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return Err(Error::params("rows", "must be at least 1"));
        }
        if self.cols < 3 {
            return Err(Error::params("cols", "need at least 3 columns"));
        }
        let c = self.start_col();
        if self.rows == 1 && (c == 0 || c >= self.cols - 1) {
            return Err(Error::params("start_col", "must be strictly between the two goals"));
        }
        if c >= self.cols {
            return Err(Error::params("start_col", "must be below cols"));
        }
        for (name, v) in [
            ("robot_goal_reward", self.robot_goal_reward),
            ("human_goal_reward", self.human_goal_reward),
            ("step_cost", self.step_cost),
            ("trust_step_cost", self.trust_step_cost),
            ("trust_goal_penalty", self.trust_goal_penalty),
        ] {
            if !v.is_finite() {
                return Err(Error::params(name, "must be finite"));
            }
        }
        if self.robot_goal_reward <= self.human_goal_reward {
            return Err(Error::params("robot_goal_reward", "must exceed human_goal_reward"));
        }
        Ok(())
    }
}

/// Robot actions consistent with each joystick direction.
pub fn signature(a_h: usize) -> u64 {
    match a_h {
        JOY_LEFT => 1 << LEFT,
        _ => (1 << STRAIGHT) | (1 << RIGHT),
    }
}

pub fn build(params: &Value, horizon: Option<usize>, human: &HumanConfig) -> Result<GameModel> {
    let p: Params = parse_params(params)?;
    p.validate()?;
    let t_max = horizon.unwrap_or(DEFAULT_HORIZON);
    let space = StateSpace::new(&[("row", p.rows), ("col", p.cols)])?;
    let n = space.len();
    let last_row = p.rows - 1;
    let left_goal = (last_row * p.cols) as usize;
    let right_goal = (last_row * p.cols + p.cols - 1) as usize;
    let terminal: Vec<bool> = (0..n).map(|s| s == left_goal || s == right_goal).collect();

    let tables = fill_tables(n, 3, 2, 2, |s, a_r, a_h| {
        let w = space.state(s);
        let (r, c) = (w.0[0], w.0[1]);
        let (r2, c2) = match a_r {
            LEFT => (r, c.saturating_sub(1)),
            RIGHT => (r, (c + 1).min(p.cols - 1)),
            _ => ((r + 1).min(last_row), c),
        };
        let next = (r2 * p.cols + c2) as usize;
        let (robot, human) = if next == right_goal {
            (p.robot_goal_reward, p.human_goal_reward)
        } else if next == left_goal {
            (p.human_goal_reward, p.robot_goal_reward)
        } else {
            (0.0, 0.0)
        };
        let disagree = signature(a_h) & (1 << a_r) == 0;
        let at_goal = next == left_goal || next == right_goal;
        let trust = if disagree { p.trust_step_cost + if at_goal { p.trust_goal_penalty } else { 0.0 } } else { 0.0 };
        Cell {
            next,
            robot: robot - p.step_cost,
            human: vec![human - p.step_cost, robot - p.step_cost],
            trust,
            disagree,
        }
    });

    let plans: Vec<ModalPlan> = [(JOY_LEFT, "left", 0), (JOY_RIGHT, "right", 1)]
        .into_iter()
        .enumerate()
        .map(|(id, (a, label, reward_param))| ModalPlan {
            id,
            label: label.to_string(),
            human_action: vec![a; n],
            robot_signature: vec![signature(a); n],
            reward_param,
        })
        .collect();

    let model_name = human.model.as_deref().unwrap_or("bam");
    let (types, human_model) = match model_name {
        "bam" => bam_setup(human, &plans, 0, 3)?,
        "fixed" => plan_types(&plans, n, 3, 2),
        other => return Err(unknown_model("shared-autonomy", other)),
    };
    let outcome = (0..n)
        .map(|s| match s {
            s if s == right_goal => Outcome::RobotGoal,
            s if s == left_goal => Outcome::HumanGoal,
            _ => Outcome::Ongoing,
        })
        .collect();
    let state_class = space.iter().map(|w| w.0[1] as usize).collect();
    let n_types = types.len();
    GameModel::new(ModelParts {
        env: "shared-autonomy".into(),
        rewards: RewardModel::new(
            n,
            3,
            2,
            tables.robot,
            tables.human,
            Some(tables.trust),
            vec!["prefers-left".into(), "prefers-right".into()],
        )?,
        space,
        robot_actions: vec!["left".into(), "straight".into(), "right".into()],
        human_actions: vec!["left".into(), "right".into()],
        next: tables.next,
        terminal,
        types,
        horizon: t_max,
        human_model,
        teamwork: Teamwork::EqualPartners,
        start: p.start_col() as usize,
        initial_belief: vec![1.0 / n_types as f64; n_types],
        disagreement: tables.disagreement,
        outcome,
        state_class,
        plans,
        role_swap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> GameModel {
        build(&Value::Null, None, &HumanConfig::default()).unwrap()
    }

    #[test]
    fn nine_arm_states() {
        let m = model();
        assert_eq!(m.n_states(), 9);
        assert_eq!(m.reachable_states().len(), 9);
        assert!(m.is_terminal(0) && m.is_terminal(8));
        assert_eq!(m.types().len(), 5);
    }

    #[test]
    fn robot_actuated_dynamics() {
        let m = model();
        for a_h in 0..2 {
            assert_eq!(m.next_state(4, RIGHT, a_h), 5);
            assert_eq!(m.next_state(4, STRAIGHT, a_h), 4);
        }
    }

    #[test]
    fn reward_asymmetry() {
        let m = model();
        let r = m.rewards();
        assert!(r.robot(7, RIGHT, JOY_RIGHT) > r.robot(1, LEFT, JOY_LEFT));
        assert!(r.human(0, 7, RIGHT, JOY_RIGHT) < r.human(0, 1, LEFT, JOY_LEFT));
    }

    #[test]
    fn trust_cost_only_on_disagreement() {
        let m = model();
        let r = m.rewards();
        assert_eq!(r.trust(4, STRAIGHT, JOY_RIGHT), 0.0);
        assert_eq!(r.trust(4, STRAIGHT, JOY_LEFT), 1.0);
        assert_eq!(r.trust(7, RIGHT, JOY_LEFT), 11.0);
    }
}
