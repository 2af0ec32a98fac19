use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::model::GameModel;

/// Quantization step used when beliefs are hashed.
pub const BELIEF_QUANTUM: f64 = 1e-9;

/// Normalized distribution over the type space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::model("belief over an empty type space"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::model("belief entries must be finite and non-negative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::model(format!("belief sums to {sum}")));
        }
        Ok(Belief(probs))
    }

    /// Normalizes arbitrary non-negative weights; `None` when they sum to zero.
    pub fn from_weights(weights: Vec<f64>) -> Option<Self> {
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return None;
        }
        Some(Belief(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, y: usize) -> Self {
        let mut v = vec![0.0; n];
        v[y] = 1.0;
        Belief(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Expected value of a per-type quantity.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.0.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(y, p)| p * f(y)).sum()
    }

    pub fn key(&self) -> BeliefKey {
        BeliefKey(self.0.iter().map(|p| (p / BELIEF_QUANTUM).round() as i64).collect())
    }

    pub fn max_abs_diff(&self, other: &Belief) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Hashable quantized belief.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeliefKey(pub Vec<i64>);

/// Chronological (state, robot action) pairs, optionally bounded to the `k`
/// most recent entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct History {
    entries: VecDeque<(usize, usize)>,
    capacity: Option<usize>,
}

impl History {
    pub fn unbounded() -> Self {
        History { entries: VecDeque::new(), capacity: None }
    }

    pub fn bounded(k: usize) -> Self {
        History { entries: VecDeque::with_capacity(k + 1), capacity: Some(k) }
    }

    pub fn from_entries(capacity: Option<usize>, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut h = History { entries: VecDeque::new(), capacity };
        for (s, a) in entries {
            h.push(s, a);
        }
        h
    }

    pub fn push(&mut self, state: usize, a_r: usize) {
        self.entries.push_back((state, a_r));
        if let Some(k) = self.capacity {
            while self.entries.len() > k {
                self.entries.pop_front();
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.entries.iter()
    }

    /// Keeps only the most recent `n` entries.
    pub fn truncate_front(&mut self, n: usize) {
        while self.entries.len() > n {
            self.entries.pop_front();
        }
    }
}

/// Observable interaction context the human conditions on: the recent
/// history and, for plan-following models, the plan the human is executing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HumanContext {
    pub history: History,
    pub plan: Option<usize>,
}

impl HumanContext {
    pub fn new(history: History) -> Self {
        HumanContext { history, plan: None }
    }
}

/// What `belief_update` does when every type assigns zero likelihood.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroLikelihoodPolicy {
    /// Fail with [`Error::ZeroLikelihood`].
    #[default]
    Error,
    /// Floor every type's likelihood at `eps` before conditioning.
    Smooth(f64),
    /// Restart from the uniform belief (then apply the type kernel).
    Reseed,
}

/// Default floor for human-in-the-loop sessions.
pub const SESSION_SMOOTHING: f64 = 1e-6;

/// Bayes filter over the latent type.
///
/// Conditions `b` on the observed human action, then pushes the posterior
/// through the type kernel for the robot action just taken:
/// `b'(y') ∝ Σ_y P(y'|y, aR) · Pr(aH | x, h, aR, y) · b(y)`.
pub fn belief_update(
    b: &Belief,
    x: usize,
    a_r: usize,
    observed_a_h: usize,
    model: &GameModel,
    ctx: &HumanContext,
) -> Result<Belief> {
    belief_update_with(b, x, a_r, observed_a_h, model, ctx, ZeroLikelihoodPolicy::Error)
}

pub fn belief_update_with(
    b: &Belief,
    x: usize,
    a_r: usize,
    observed_a_h: usize,
    model: &GameModel,
    ctx: &HumanContext,
    on_zero: ZeroLikelihoodPolicy,
) -> Result<Belief> {
    let lik = model.human_model().likelihoods(model, x, ctx, a_r, observed_a_h);
    condition_and_predict(b, &lik, a_r, observed_a_h, model, on_zero)
}

/// Same as [`belief_update_with`] given precomputed per-type likelihoods.
pub fn condition_and_predict(
    b: &Belief,
    likelihoods: &[f64],
    a_r: usize,
    observed_a_h: usize,
    model: &GameModel,
    on_zero: ZeroLikelihoodPolicy,
) -> Result<Belief> {
    let n = b.len();
    let lik: Vec<f64> = match on_zero {
        ZeroLikelihoodPolicy::Smooth(eps) => likelihoods.iter().map(|l| l.max(eps)).collect(),
        _ => likelihoods.to_vec(),
    };
    let posterior: Vec<f64> = b.probs().iter().zip(&lik).map(|(p, l)| p * l).collect();
    let posterior = match Belief::from_weights(posterior) {
        Some(p) => p,
        None if on_zero == ZeroLikelihoodPolicy::Reseed => Belief::uniform(n),
        None => return Err(Error::ZeroLikelihood { action: observed_a_h }),
    };
    Ok(predict(&posterior, a_r, model))
}

/// Pushes a belief through the type kernel.
pub fn predict(b: &Belief, a_r: usize, model: &GameModel) -> Belief {
    let types = model.types();
    if types.is_static() {
        return b.clone();
    }
    let n = b.len();
    let mut out = vec![0.0; n];
    for (y, p) in b.probs().iter().enumerate().filter(|(_, p)| **p > 0.0) {
        for (y2, k) in types.transition_row(y, a_r).iter().enumerate() {
            out[y2] += p * k;
        }
    }
    Belief::from_weights(out).expect("kernel rows are distributions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_history_evicts_oldest() {
        let mut h = History::bounded(2);
        h.push(1, 0);
        h.push(2, 1);
        h.push(3, 2);
        assert_eq!(h.iter().copied().collect::<Vec<_>>(), vec![(2, 1), (3, 2)]);
    }

    #[test]
    fn from_weights_rejects_zero_mass() {
        assert!(Belief::from_weights(vec![0.0, 0.0]).is_none());
        let b = Belief::from_weights(vec![2.0, 6.0]).unwrap();
        assert_eq!(b.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn key_quantizes() {
        let a = Belief::new(vec![0.5, 0.5]).unwrap();
        let b = Belief::new(vec![0.5 + 1e-13, 0.5 - 1e-13]).unwrap();
        assert_eq!(a.key(), b.key());
    }
}
