use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fitting::ml_reward;
use super::{smoothed_table, with_fitted_types, DemoStep, Demonstration, Phase, DEFAULT_SMOOTHING};
use crate::error::{Error, Result};
use crate::game::GameModel;
use crate::human::{sample_index, SimulatedHuman};
use crate::planner::argmax_lowest;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub reward_estimate: usize,
    pub log_likelihood: Vec<f64>,
    /// Exact expected team reward of the recomputed robot policy against
    /// the simulated human.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossTrainResult {
    pub planted: usize,
    /// `policy_estimate[s * nH + aH]`, add-one smoothed.
    pub policy_estimate: Vec<f64>,
    pub reward_estimate: usize,
    pub reward_label: String,
    /// Value of the robot policy before any training.
    pub initial_value: f64,
    pub rounds: Vec<RoundLog>,
    /// Robot policy after the last round: `table[t][x]` with `t` steps to go.
    pub robot_policy: Vec<Vec<usize>>,
    pub demonstrations: Vec<Demonstration>,
}

/// Optimal robot table against type `y` of a model whose human ignores
/// history: `(table[t][x], V_T(start))`.
pub fn plan_table(model: &GameModel, y: usize) -> (Vec<Vec<usize>>, f64) {
    let n = model.n_states();
    let ctx = model.human_model().initial_context();
    let mut v = vec![0.0; n];
    let mut table = vec![vec![0; n]];
    for _ in 0..model.horizon() {
        let mut nv = vec![0.0; n];
        let mut acts = vec![0; n];
        for s in (0..n).filter(|s| !model.is_terminal(*s)) {
            let q: Vec<f64> = (0..model.n_robot()).map(|a_r| backup(model, &ctx, &v, s, a_r, y)).collect();
            let (a, best) = argmax_lowest(&q);
            acts[s] = a;
            nv[s] = best;
        }
        table.push(acts);
        v = nv;
    }
    (table, v[model.start()])
}

fn backup(model: &GameModel, ctx: &crate::game::HumanContext, v: &[f64], s: usize, a_r: usize, y: usize) -> f64 {
    model
        .human_model()
        .action_distribution(model, s, ctx, a_r, y)
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(a_h, p)| p * (model.planning_reward(s, a_r, a_h, y) + v[model.next_state(s, a_r, a_h)]))
        .sum()
}

/// Expected return of `table` from `x0` against type `y`.
pub fn evaluate_table(model: &GameModel, table: &[Vec<usize>], y: usize, x0: usize) -> f64 {
    let n = model.n_states();
    let ctx = model.human_model().initial_context();
    let mut v = vec![0.0; n];
    for row in table.iter().skip(1) {
        v = (0..n).map(|s| if model.is_terminal(s) { 0.0 } else { backup(model, &ctx, &v, s, row[s], y) }).collect();
    }
    v[x0]
}

fn step(model: &GameModel, t: usize, x: usize, a_r: usize, a_h: usize, y: usize) -> DemoStep {
    DemoStep {
        t,
        x: model.world_state(x).0,
        a_r,
        a_h,
        r_r: model.robot_reward(x, a_r, a_h, y),
        r_h: model.human_reward(x, a_r, a_h, y),
        y: y as i64,
    }
}

/// Alternates forward and rotation phases with a simulated human of type
/// `planted`.
///
/// Forward: the robot plays its current policy and counts the human's
/// actions. Rotation: the human chooses the robot-role actions and the robot
/// carries them out; the reward parameter is re-estimated by maximum
/// likelihood over all rotation data so far. The robot then replans against
/// a single type built from the two estimates.
pub fn cross_train<R: Rng + ?Sized>(
    model: &GameModel,
    planted: usize,
    rounds: usize,
    rng: &mut R,
) -> Result<CrossTrainResult> {
    let swap = model.role_swap().ok_or_else(|| Error::RoleSwapUnsupported(model.env().to_string()))?;
    if rounds == 0 {
        return Err(Error::params("rounds", "must be at least 1"));
    }
    if planted >= model.types().len() {
        return Err(Error::params("planted", format!("type {planted} is outside the type space")));
    }
    let nh = model.n_human();
    let horizon = model.horizon();
    let mut counts = vec![0.0; model.n_states() * nh];
    let mut rotation: Vec<(usize, usize, usize)> = Vec::new();
    let mut estimate = smoothed_table(model, &counts, DEFAULT_SMOOTHING);
    let mut reward_estimate = 0;
    let mut table = plan_table(&with_fitted_types(model, vec![estimate.clone()], &[reward_estimate])?, 0).0;
    let initial_value = evaluate_table(model, &table, planted, model.start());
    let mut log = Vec::with_capacity(rounds);
    let mut demonstrations = Vec::with_capacity(2 * rounds);

    for round in 1..=rounds {
        let mut human = SimulatedHuman::new(model, planted);
        let mut x = model.start();
        let mut steps = Vec::new();
        for t in 0..horizon {
            if model.is_terminal(x) {
                break;
            }
            let a_r = table[horizon - t][x];
            let a_h = human.act(model, x, a_r, rng);
            counts[x * nh + a_h] += 1.0;
            steps.push(step(model, t, x, a_r, a_h, planted));
            x = model.next_state(x, a_r, a_h);
        }
        demonstrations.push(Demonstration { phase: Phase::Forward, steps });

        let mut x = model.start();
        let mut steps = Vec::new();
        for t in 0..horizon {
            if model.is_terminal(x) {
                break;
            }
            let prepared = sample_index(&swap.policy(planted, x, nh), rng);
            rotation.push((x, prepared, prepared));
            steps.push(step(model, t, x, prepared, prepared, planted));
            x = model.next_state(x, prepared, prepared);
        }
        demonstrations.push(Demonstration { phase: Phase::Rotation, steps });

        estimate = smoothed_table(model, &counts, DEFAULT_SMOOTHING);
        let (best, ll) = ml_reward(model, &rotation);
        reward_estimate = best;
        table = plan_table(&with_fitted_types(model, vec![estimate.clone()], &[reward_estimate])?, 0).0;
        let value = evaluate_table(model, &table, planted, model.start());
        log::debug!("cross-training round {round}: reward {reward_estimate}, value {value}");
        log.push(RoundLog { round, reward_estimate, log_likelihood: ll, value });
    }
    Ok(CrossTrainResult {
        planted,
        policy_estimate: estimate,
        reward_estimate,
        reward_label: model.rewards().param_labels().get(reward_estimate).cloned().unwrap_or_default(),
        initial_value,
        rounds: log,
        robot_policy: table,
        demonstrations,
    })
}
