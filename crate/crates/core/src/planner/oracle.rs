//! Brute-force expectimax over robot strategy trees.
//!
//! Deliberately naive: no memoization, no normalized beliefs. The recursion
//! carries unnormalized type weights `w(y) = P(y, observations so far)` so
//! it shares no code with the belief-space solver beyond the model tables
//! and the human likelihoods.

use crate::error::{Error, Result};
use crate::game::{GameModel, HumanContext, Teamwork};
use crate::human::action_likelihood;

pub const DEFAULT_LEAF_CAP: u128 = 50_000_000;

fn leaf_count(model: &GameModel, horizon: usize) -> u128 {
    ((model.n_robot() * model.n_human()) as u128).saturating_pow(horizon as u32)
}

fn check_cap(model: &GameModel, horizon: usize, cap: u128) -> Result<()> {
    let count = leaf_count(model, horizon);
    if count > cap {
        return Err(Error::TooLarge { count, cap });
    }
    Ok(())
}

fn step_reward(model: &GameModel, x: usize, a_r: usize, a_h: usize, y: usize) -> f64 {
    match model.teamwork() {
        Teamwork::EqualPartners => model.rewards().robot(x, a_r, a_h) - model.rewards().trust(x, a_r, a_h),
        Teamwork::LeaderAssistant => model.rewards().human(model.types().get(y).reward_param, x, a_r, a_h),
    }
}

/// Weighted value of playing `a_r` now and optimally afterwards.
fn q_value(model: &GameModel, x: usize, ctx: &HumanContext, w: &[f64], t: usize, a_r: usize) -> f64 {
    let n_types = w.len();
    let mut total = 0.0;
    for a_h in 0..model.n_human() {
        let joint: Vec<f64> = (0..n_types)
            .map(|y| if w[y] == 0.0 { 0.0 } else { w[y] * action_likelihood(model, x, ctx, a_r, a_h, y) })
            .collect();
        if joint.iter().all(|j| *j == 0.0) {
            continue;
        }
        for (y, j) in joint.iter().enumerate() {
            if *j != 0.0 {
                total += j * step_reward(model, x, a_r, a_h, y);
            }
        }
        let mut w2 = vec![0.0; n_types];
        for (y, j) in joint.iter().enumerate() {
            if *j != 0.0 {
                for (y2, k) in model.types().transition_row(y, a_r).iter().enumerate() {
                    w2[y2] += j * k;
                }
            }
        }
        let x2 = model.next_state(x, a_r, a_h);
        let ctx2 = model.human_model().next_context(ctx, x, a_r, a_h);
        total += value(model, x2, &ctx2, &w2, t - 1);
    }
    total
}

fn value(model: &GameModel, x: usize, ctx: &HumanContext, w: &[f64], t: usize) -> f64 {
    if t == 0 || model.is_terminal(x) {
        return 0.0;
    }
    (0..model.n_robot()).map(|a_r| q_value(model, x, ctx, w, t, a_r)).fold(f64::NEG_INFINITY, f64::max)
}

/// Exact optimum of the finite-horizon objective by exhaustive enumeration.
pub fn brute_force_value(model: &GameModel, x0: usize, b0: &[f64], horizon: usize) -> Result<f64> {
    brute_force_value_capped(model, x0, b0, horizon, DEFAULT_LEAF_CAP)
}

pub fn brute_force_value_capped(model: &GameModel, x0: usize, b0: &[f64], horizon: usize, cap: u128) -> Result<f64> {
    check_cap(model, horizon, cap)?;
    Ok(value(model, x0, &model.human_model().initial_context(), b0, horizon))
}

/// Q-value of every first robot action (empty when the root is a leaf).
pub fn brute_force_root_q(model: &GameModel, x0: usize, b0: &[f64], horizon: usize) -> Result<Vec<f64>> {
    check_cap(model, horizon, DEFAULT_LEAF_CAP)?;
    if horizon == 0 || model.is_terminal(x0) {
        return Ok(Vec::new());
    }
    let ctx = model.human_model().initial_context();
    Ok((0..model.n_robot()).map(|a_r| q_value(model, x0, &ctx, b0, horizon, a_r)).collect())
}
