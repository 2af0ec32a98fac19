//! Bounded-memory adaptation model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{History, HumanContext};

/// A joint plan: what the human does in each state and which robot actions
/// are consistent with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalPlan {
    pub id: usize,
    pub label: String,
    /// Intended human action per state index.
    pub human_action: Vec<usize>,
    /// Bitmask over robot actions, per state index.
    pub robot_signature: Vec<u64>,
    /// Human reward parameterization under which this plan is the preferred one.
    pub reward_param: usize,
}

impl ModalPlan {
    pub fn consistent(&self, state: usize, a_r: usize) -> bool {
        self.robot_signature[state] & (1u64 << a_r) != 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BamModel {
    pub plans: Vec<ModalPlan>,
    pub k: usize,
    pub eps_plan: f64,
    pub initial_plan: usize,
}

pub const DEFAULT_MEMORY: usize = 1;
pub const DEFAULT_EPS_PLAN: f64 = 0.01;

/// Tolerance used to decide whether the plan posterior has a unique mode.
const MODE_TOL: f64 = 1e-12;

/// Posterior over plans given the recent history: uniform prior times one
/// consistency factor per entry (1 if the robot action fits the plan's
/// signature, `eps_plan` otherwise).
pub fn bam_infer_plan(h: &History, plans: &[ModalPlan], eps_plan: f64) -> Result<Vec<f64>> {
    if h.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut w: Vec<f64> = plans
        .iter()
        .map(|p| h.iter().map(|&(s, a)| if p.consistent(s, a) { 1.0 } else { eps_plan }).product())
        .collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= z);
    Ok(w)
}

/// Index of the strictly most likely plan, if there is one.
pub fn unique_mode(dist: &[f64]) -> Option<usize> {
    let max = dist.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut modes = dist.iter().enumerate().filter(|(_, p)| max - **p <= MODE_TOL);
    let first = modes.next()?.0;
    modes.next().is_none().then_some(first)
}

impl BamModel {
    pub fn current_plan(&self, ctx: &HumanContext) -> usize {
        ctx.plan.unwrap_or(self.initial_plan)
    }

    /// The plan the human would switch to after seeing `a_r` at `x`, if it
    /// differs from the current one.
    pub fn switch_target(&self, ctx: &HumanContext, x: usize, a_r: usize) -> Option<usize> {
        let mut h = ctx.history.clone();
        h.push(x, a_r);
        h.truncate_front(self.k);
        let dist = bam_infer_plan(&h, &self.plans, self.eps_plan).expect("history is non-empty");
        unique_mode(&dist).filter(|p| *p != self.current_plan(ctx))
    }

    /// Exact action distribution for a human with adaptability `alpha`.
    pub fn action_distribution(
        &self,
        ctx: &HumanContext,
        x: usize,
        a_r: usize,
        alpha: f64,
        n_human: usize,
    ) -> Vec<f64> {
        let mut out = vec![0.0; n_human];
        let cur = self.current_plan(ctx);
        match self.switch_target(ctx, x, a_r) {
            Some(p) => {
                out[self.plans[p].human_action[x]] += alpha;
                out[self.plans[cur].human_action[x]] += 1.0 - alpha;
            }
            None => out[self.plans[cur].human_action[x]] = 1.0,
        }
        out
    }

    /// Context after the step: history extended (keeping only what the next
    /// inference can see) and the plan identified from the observed action.
    pub fn next_context(&self, ctx: &HumanContext, x: usize, a_r: usize, a_h: usize) -> HumanContext {
        let mut history = ctx.history.clone();
        history.push(x, a_r);
        history.truncate_front(self.k.saturating_sub(1));
        let cur = self.current_plan(ctx);
        let plan = if self.plans[cur].human_action[x] == a_h {
            cur
        } else {
            self.plans.iter().position(|p| p.human_action[x] == a_h).unwrap_or(cur)
        };
        HumanContext { history, plan: Some(plan) }
    }

    pub fn initial_context(&self) -> HumanContext {
        HumanContext { history: History::bounded(self.k), plan: Some(self.initial_plan) }
    }
}

/// One generative BAM step: record `(x, a_r)`, maybe switch to the robot's
/// inferred plan with probability `alpha`, then act on the current plan.
pub fn bam_step<R: Rng + ?Sized>(
    bam: &BamModel,
    state: &HumanContext,
    x: usize,
    observed_a_r: usize,
    alpha: f64,
    rng: &mut R,
) -> (usize, HumanContext) {
    let mut plan = bam.current_plan(state);
    if let Some(target) = bam.switch_target(state, x, observed_a_r) {
        let u: f64 = rng.gen();
        if u < alpha {
            plan = target;
        }
    }
    let mut history = state.history.clone();
    history.push(x, observed_a_r);
    history.truncate_front(bam.k);
    (bam.plans[plan].human_action[x], HumanContext { history, plan: Some(plan) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plans3() -> Vec<ModalPlan> {
        // one state, robot actions 0..3; plan i accepts robot action i (plan 2 also accepts 0)
        vec![
            ModalPlan {
                id: 0,
                label: "a".into(),
                human_action: vec![0],
                robot_signature: vec![0b001],
                reward_param: 0,
            },
            ModalPlan {
                id: 1,
                label: "b".into(),
                human_action: vec![1],
                robot_signature: vec![0b010],
                reward_param: 0,
            },
            ModalPlan {
                id: 2,
                label: "c".into(),
                human_action: vec![2],
                robot_signature: vec![0b101],
                reward_param: 0,
            },
        ]
    }

    #[test]
    fn empty_history_is_an_error() {
        assert!(matches!(bam_infer_plan(&History::bounded(1), &plans3(), 0.01), Err(Error::EmptyHistory)));
    }

    #[test]
    fn single_consistent_plan_dominates() {
        let mut h = History::bounded(1);
        h.push(0, 1);
        let d = bam_infer_plan(&h, &plans3(), 0.01).unwrap();
        assert!(d[1] >= 1.0 - 2.0 * 0.01);
        assert_eq!(unique_mode(&d), Some(1));
    }

    #[test]
    fn two_consistent_plans_split() {
        let mut h = History::bounded(1);
        h.push(0, 0);
        let d = bam_infer_plan(&h, &plans3(), 0.01).unwrap();
        assert!((d[0] - d[2]).abs() < 1e-15);
        assert_eq!(unique_mode(&d), None);
    }

    #[test]
    fn mixed_history_matches_hand_enumeration() {
        let mut h = History::bounded(2);
        h.push(0, 0);
        h.push(0, 1);
        let d = bam_infer_plan(&h, &plans3(), 0.01).unwrap();
        // products: plan0 = 1·ε, plan1 = ε·1, plan2 = 1·ε
        let z = 3.0 * 0.01;
        for p in d {
            assert!((p - 0.01 / z).abs() < 1e-15);
        }
    }
}
