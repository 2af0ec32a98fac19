//! Comparison policies: a robot that ignores the human, and one that only
//! adapts to the human's inferred preference.

use crate::envs::plan_types;
use crate::error::Result;
use crate::game::{Belief, GameModel, Teamwork};

use super::exact::{argmax_lowest, solve_from, Solution, SolveOptions};

/// `table[t][s]`: action with `t` steps to go, computed by DP on the robot's
/// task reward as if the human always complied.
pub fn no_adaptation_table(model: &GameModel) -> Vec<Vec<usize>> {
    let n = model.n_states();
    let prior = Belief::new(model.initial_belief().to_vec()).expect("validated by the model");
    let reward = |s: usize, a_r: usize, a_h: usize| match model.teamwork() {
        Teamwork::EqualPartners => model.rewards().robot(s, a_r, a_h),
        Teamwork::LeaderAssistant => prior.expect(|y| model.human_reward(s, a_r, a_h, y)),
    };
    let mut v = vec![0.0; n];
    let mut table = vec![vec![0; n]];
    for _ in 1..=model.horizon() {
        let mut nv = vec![0.0; n];
        let mut acts = vec![0; n];
        for s in (0..n).filter(|s| !model.is_terminal(*s)) {
            let q: Vec<f64> = (0..model.n_robot())
                .map(|a_r| {
                    (0..model.n_human())
                        .map(|a_h| reward(s, a_r, a_h) + v[model.next_state(s, a_r, a_h)])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let (a, best) = argmax_lowest(&q);
            acts[s] = a;
            nv[s] = best;
        }
        table.push(acts);
        v = nv;
    }
    table
}

/// Leader-assistant model the adaptation-only robot plans in.
///
/// With declared joint plans the types are "follows plan p" with the plan's
/// preferred reward; otherwise the model's own types are kept. The prior is
/// uniform and the robot optimizes the human's reward.
pub fn assistant_model(model: &GameModel) -> Result<GameModel> {
    let mut parts = model.clone().into_parts();
    if !parts.plans.is_empty() {
        let (types, human_model) =
            plan_types(&parts.plans, parts.space.len(), parts.robot_actions.len(), parts.human_actions.len());
        parts.types = types;
        parts.human_model = human_model;
    }
    let n = parts.types.len();
    parts.initial_belief = vec![1.0 / n as f64; n];
    parts.teamwork = Teamwork::LeaderAssistant;
    GameModel::new(parts)
}

pub fn solve_assistant(derived: &GameModel, opts: SolveOptions) -> Result<Solution> {
    let b0 = Belief::uniform(derived.types().len());
    solve_from(derived, derived.start(), &derived.human_model().initial_context(), &b0, derived.horizon(), opts)
}
