use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::game::{belief_update_with, Belief, EpisodeTrace, GameModel, TraceStep, ZeroLikelihoodPolicy};
use crate::human::SimulatedHuman;
use crate::planner::{PolicyRunner, RobotPolicy};

/// Seed of episode `index` under `master`: one ChaCha stream per episode, so
/// an episode never depends on how many others run.
pub fn episode_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Clone, Debug)]
pub struct EpisodeSetup {
    pub x0: usize,
    /// True initial type.
    pub y0: usize,
    /// Robot's initial belief (also the prior logged in the trace).
    pub b0: Belief,
    pub seed: u64,
    pub condition: String,
    pub on_zero: ZeroLikelihoodPolicy,
}

impl EpisodeSetup {
    pub fn new(model: &GameModel, y0: usize, seed: u64) -> Self {
        EpisodeSetup {
            x0: model.start(),
            y0,
            b0: Belief::new(model.initial_belief().to_vec()).expect("validated by the model"),
            seed,
            condition: String::new(),
            on_zero: ZeroLikelihoodPolicy::Error,
        }
    }
}

/// Closed-loop rollout until a terminal state or the horizon.
///
/// Per step: the robot decides, the human answers, the world moves, the
/// robot's belief absorbs the observation, then the human's type may drift.
pub fn run_episode(model: &Arc<GameModel>, policy: &Arc<RobotPolicy>, setup: &EpisodeSetup) -> Result<EpisodeTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let mut runner = PolicyRunner::new(policy.clone(), model.clone());
    let mut human = SimulatedHuman::new(model, setup.y0);
    let mut x = setup.x0;
    let mut ctx = model.human_model().initial_context();
    let mut b = setup.b0.clone();
    let horizon = model.horizon();
    let mut steps = Vec::with_capacity(horizon);
    for t in 0..horizon {
        if model.is_terminal(x) {
            break;
        }
        let a_r = runner.decide(x, &ctx, &b, horizon - t)?;
        let a_h = human.act(model, x, a_r, &mut rng);
        let y = human.y;
        let r_r = model.robot_reward(x, a_r, a_h, y);
        let r_h = model.human_reward(x, a_r, a_h, y);
        b = belief_update_with(&b, x, a_r, a_h, model, &ctx, setup.on_zero)?;
        runner.observe(x, a_r, a_h)?;
        ctx = model.human_model().next_context(&ctx, x, a_r, a_h);
        human.transition(model, a_r, &mut rng);
        steps.push(TraceStep {
            t,
            x: model.world_state(x).0,
            a_r,
            a_h,
            belief: b.probs().to_vec(),
            r_r,
            r_h,
            y: y as i64,
        });
        x = model.next_state(x, a_r, a_h);
    }
    Ok(EpisodeTrace {
        seed: setup.seed,
        condition: setup.condition.clone(),
        initial_belief: setup.b0.probs().to_vec(),
        steps,
    })
}

/// Monte-Carlo estimate of the robot's expected return: `(mean, stderr)`.
pub fn evaluate_policy_pair(
    model: &Arc<GameModel>,
    policy: &Arc<RobotPolicy>,
    x0: usize,
    y0: usize,
    n_episodes: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let returns: Vec<f64> = (0..n_episodes as u64)
        .into_par_iter()
        .map(|i| {
            let mut setup = EpisodeSetup::new(model, y0, episode_seed(seed, i));
            setup.x0 = x0;
            run_episode(model, policy, &setup).map(|tr| tr.steps.iter().map(|s| s.r_r).sum())
        })
        .collect::<Result<_>>()?;
    let s = super::metrics::Stat::of(&returns);
    Ok((s.mean, s.stderr))
}
