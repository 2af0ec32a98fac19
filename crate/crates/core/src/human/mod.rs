//! Simulated human policies and the action likelihoods the robot filters with.

mod agent;
mod bam;

pub use agent::SimulatedHuman;
pub use bam::{bam_infer_plan, bam_step, unique_mode, BamModel, ModalPlan, DEFAULT_EPS_PLAN, DEFAULT_MEMORY};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::model::check_distribution;
use crate::game::{GameModel, History, HumanContext, TypeSpace};

/// Per-type stationary policy tables: `tables[y][s * n_human + a_h]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPolicies {
    pub n_human: usize,
    pub tables: Vec<Vec<f64>>,
}

impl FixedPolicies {
    pub fn row(&self, y: usize, s: usize) -> &[f64] {
        &self.tables[y][s * self.n_human..(s + 1) * self.n_human]
    }
}

/// Which human model generates `πᴴ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum HumanModel {
    Fixed(FixedPolicies),
    Bam(BamModel),
    BestResponse,
}

impl HumanModel {
    pub fn name(&self) -> &'static str {
        match self {
            HumanModel::Fixed(_) => "fixed",
            HumanModel::Bam(_) => "bam",
            HumanModel::BestResponse => "best-response",
        }
    }

    pub(crate) fn validate(
        &self,
        n_states: usize,
        n_robot: usize,
        n_human: usize,
        types: &TypeSpace,
        terminal: &[bool],
    ) -> Result<()> {
        match self {
            HumanModel::Fixed(f) => {
                if f.n_human != n_human || f.tables.len() != types.len() {
                    return Err(Error::model("fixed policy tables do not match the model"));
                }
                for (y, t) in f.tables.iter().enumerate() {
                    if t.len() != n_states * n_human {
                        return Err(Error::model(format!("fixed policy for type {y} has the wrong size")));
                    }
                    for s in 0..n_states {
                        check_distribution(f.row(y, s), n_human, &format!("fixed policy (y={y}, s={s})"))?;
                    }
                }
            }
            HumanModel::Bam(b) => {
                if b.k == 0 {
                    return Err(Error::params("k", "memory size must be at least 1"));
                }
                if !(0.0..1.0).contains(&b.eps_plan) {
                    return Err(Error::params("eps_plan", "must lie in [0, 1)"));
                }
                if b.plans.is_empty() || b.initial_plan >= b.plans.len() {
                    return Err(Error::model("BAM needs plans and a valid initial plan"));
                }
                if n_robot > 64 {
                    return Err(Error::model("BAM signatures support at most 64 robot actions"));
                }
                for p in &b.plans {
                    if p.human_action.len() != n_states || p.robot_signature.len() != n_states {
                        return Err(Error::model(format!("plan `{}` must cover every state", p.label)));
                    }
                    if p.human_action.iter().any(|a| *a >= n_human) {
                        return Err(Error::model(format!("plan `{}` uses an unknown human action", p.label)));
                    }
                    if p.robot_signature.iter().any(|m| n_robot < 64 && m >> n_robot != 0) {
                        return Err(Error::model(format!("plan `{}` signature names unknown robot actions", p.label)));
                    }
                }
                for s in (0..n_states).filter(|s| !terminal[*s]) {
                    let mut seen = 0u64;
                    for p in &b.plans {
                        let bit = 1u64 << p.human_action[s];
                        if seen & bit != 0 {
                            return Err(Error::model(format!(
                                "two plans prescribe the same human action in state {s}"
                            )));
                        }
                        seen |= bit;
                    }
                }
            }
            HumanModel::BestResponse => {}
        }
        Ok(())
    }

    /// Context at the start of an episode.
    pub fn initial_context(&self) -> HumanContext {
        match self {
            HumanModel::Bam(b) => b.initial_context(),
            _ => HumanContext::new(History::bounded(0)),
        }
    }

    /// Observable context after `(x, a_r, a_h)`.
    pub fn next_context(&self, ctx: &HumanContext, x: usize, a_r: usize, a_h: usize) -> HumanContext {
        match self {
            HumanModel::Bam(b) => b.next_context(ctx, x, a_r, a_h),
            _ => ctx.clone(),
        }
    }

    /// `Pr(aH | x, h, aR, y)` for every `aH`.
    pub fn action_distribution(
        &self,
        model: &GameModel,
        x: usize,
        ctx: &HumanContext,
        a_r: usize,
        y: usize,
    ) -> Vec<f64> {
        let n_human = model.n_human();
        match self {
            HumanModel::Fixed(f) => f.row(y, x).to_vec(),
            HumanModel::Bam(b) => b.action_distribution(ctx, x, a_r, model.types().get(y).adaptability, n_human),
            HumanModel::BestResponse => {
                let mut out = vec![0.0; n_human];
                out[best_response(model, x, a_r, model.types().get(y).reward_param)] = 1.0;
                out
            }
        }
    }

    /// Likelihood of `a_h` under every type.
    pub fn likelihoods(&self, model: &GameModel, x: usize, ctx: &HumanContext, a_r: usize, a_h: usize) -> Vec<f64> {
        (0..model.types().len()).map(|y| action_likelihood(model, x, ctx, a_r, a_h, y)).collect()
    }
}

/// Stationary policy of a fixed type.
pub fn fixed_policy(policies: &FixedPolicies, x: usize, y: usize) -> &[f64] {
    policies.row(y, x)
}

/// `argmax_aH Rᴴ(x, aR, aH; param)`, lowest index on ties.
pub fn best_response(model: &GameModel, x: usize, a_r: usize, reward_param: usize) -> usize {
    let rewards = model.rewards();
    let mut best = 0;
    let mut best_v = rewards.human(reward_param, x, a_r, 0);
    for a_h in 1..model.n_human() {
        let v = rewards.human(reward_param, x, a_r, a_h);
        if v > best_v {
            best = a_h;
            best_v = v;
        }
    }
    best
}

/// Analytic `Pr(aH | x, h, aR, y)`.
pub fn action_likelihood(model: &GameModel, x: usize, ctx: &HumanContext, a_r: usize, a_h: usize, y: usize) -> f64 {
    match model.human_model() {
        HumanModel::Fixed(f) => f.row(y, x)[a_h],
        HumanModel::BestResponse => {
            if best_response(model, x, a_r, model.types().get(y).reward_param) == a_h {
                1.0
            } else {
                0.0
            }
        }
        hm @ HumanModel::Bam(_) => hm.action_distribution(model, x, ctx, a_r, y)[a_h],
    }
}

/// Samples the next type from the kernel row for `(y, a_r)`.
pub fn type_transition_step<R: Rng + ?Sized>(y: usize, a_r: usize, types: &TypeSpace, rng: &mut R) -> usize {
    let row = types.transition_row(y, a_r);
    if row[y] == 1.0 {
        return y;
    }
    sample_index(row, rng)
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
