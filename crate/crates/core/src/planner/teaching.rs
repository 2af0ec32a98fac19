use serde::Serialize;

use super::exact::{argmax_lowest, solve_from, SolveOptions};
use super::oracle::brute_force_root_q;
use crate::error::Result;
use crate::game::{Belief, GameModel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeachingReport {
    pub horizon: usize,
    /// First action of the optimal `horizon`-step policy.
    pub optimal_action: usize,
    /// Optimal action when only the next step counts.
    pub myopic_action: usize,
    pub optimal_value: f64,
    /// `horizon`-step value of opening with the myopic action.
    pub myopic_value: f64,
    pub optimal_immediate: f64,
    pub myopic_immediate: f64,
    /// First action preferred by the brute-force oracle, when within its cap.
    pub oracle_action: Option<usize>,
    pub teaching: bool,
}

/// Does the planner give up immediate reward to change the human's type?
pub fn teaching_action_check(model: &GameModel, x0: usize, b0: &Belief, horizon: usize) -> Result<TeachingReport> {
    let ctx = model.human_model().initial_context();
    let opts = SolveOptions::default();
    let full = solve_from(model, x0, &ctx, b0, horizon, opts)?;
    let myopic = solve_from(model, x0, &ctx, b0, horizon.min(1), opts)?;
    if full.root_q.is_empty() {
        return Ok(TeachingReport {
            horizon,
            optimal_action: 0,
            myopic_action: 0,
            optimal_value: 0.0,
            myopic_value: 0.0,
            optimal_immediate: 0.0,
            myopic_immediate: 0.0,
            oracle_action: None,
            teaching: false,
        });
    }
    let (optimal_action, optimal_value) = argmax_lowest(&full.root_q);
    let (myopic_action, _) = argmax_lowest(&myopic.root_q);
    let oracle_action = brute_force_root_q(model, x0, b0.probs(), horizon).ok().map(|q| argmax_lowest(&q).0);
    let at = |q: &[f64], a: usize| q.get(a).copied().unwrap_or(0.0);
    Ok(TeachingReport {
        horizon,
        optimal_action,
        myopic_action,
        optimal_value,
        myopic_value: at(&full.root_q, myopic_action),
        optimal_immediate: at(&myopic.root_q, optimal_action),
        myopic_immediate: at(&myopic.root_q, myopic_action),
        oracle_action,
        teaching: optimal_action != myopic_action,
    })
}
