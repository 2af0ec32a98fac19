//! Exact finite-horizon dynamic programming over reachable beliefs.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{condition_and_predict, Belief, BeliefKey, GameModel, HumanContext, Teamwork, ZeroLikelihoodPolicy};
use crate::human::action_likelihood;

/// Two Q-values closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-9;

pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// Planner node: world state, observable human context, belief, steps to go.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeKey {
    pub x: usize,
    pub ctx: HumanContext,
    pub belief: BeliefKey,
    pub t: usize,
}

impl NodeKey {
    pub fn new(x: usize, ctx: &HumanContext, b: &Belief, t: usize) -> Self {
        NodeKey { x, ctx: ctx.clone(), belief: b.key(), t }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeEntry {
    pub belief: Belief,
    pub action: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub node_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { node_cap: DEFAULT_NODE_CAP }
    }
}

/// Value and greedy action for every non-leaf node reachable from the root.
#[derive(Clone, Debug, Default)]
pub struct Solution {
    pub value: f64,
    /// Q-value of each robot action at the root (empty when the root is a leaf).
    pub root_q: Vec<f64>,
    pub root: Option<NodeKey>,
    pub entries: BTreeMap<NodeKey, NodeEntry>,
}

impl Solution {
    pub fn action(&self, key: &NodeKey) -> Option<usize> {
        self.entries.get(key).map(|e| e.action)
    }

    pub fn root_action(&self) -> Option<usize> {
        self.root.as_ref().and_then(|k| self.action(k))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Lowest-index action within [`TIE_TOL`] of the best Q-value.
pub fn argmax_lowest(q: &[f64]) -> (usize, f64) {
    let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a = q.iter().position(|v| *v >= best - TIE_TOL).unwrap_or(0);
    (a, best)
}

struct Transition {
    /// Probability-weighted immediate reward.
    reward: f64,
    prob: f64,
    child: Option<usize>,
}

struct Expanded {
    key: NodeKey,
    belief: Belief,
    trans: Vec<Option<Transition>>,
}

type PendingChild = (f64, f64, Option<(NodeKey, Belief)>);

fn expand(model: &GameModel, key: &NodeKey, b: &Belief) -> Vec<Option<PendingChild>> {
    let (nr, nh) = (model.n_robot(), model.n_human());
    let n_types = model.types().len();
    let x = key.x;
    let mut out = Vec::with_capacity(nr * nh);
    for a_r in 0..nr {
        for a_h in 0..nh {
            let lik: Vec<f64> = (0..n_types)
                .map(|y| if b.probs()[y] > 0.0 { action_likelihood(model, x, &key.ctx, a_r, a_h, y) } else { 0.0 })
                .collect();
            let prob: f64 = b.probs().iter().zip(&lik).map(|(p, l)| p * l).sum();
            if prob <= 0.0 {
                out.push(None);
                continue;
            }
            let reward = match model.teamwork() {
                Teamwork::EqualPartners => prob * model.planning_reward(x, a_r, a_h, 0),
                Teamwork::LeaderAssistant => (0..n_types)
                    .filter(|y| b.probs()[*y] * lik[*y] > 0.0)
                    .map(|y| b.probs()[y] * lik[y] * model.planning_reward(x, a_r, a_h, y))
                    .sum(),
            };
            let x2 = model.next_state(x, a_r, a_h);
            let child = if key.t > 1 && !model.is_terminal(x2) {
                let b2 = condition_and_predict(b, &lik, a_r, a_h, model, ZeroLikelihoodPolicy::Error)
                    .expect("observation has positive probability");
                let ctx2 = model.human_model().next_context(&key.ctx, x, a_r, a_h);
                Some((NodeKey::new(x2, &ctx2, &b2, key.t - 1), b2))
            } else {
                None
            };
            out.push(Some((reward, prob, child)));
        }
    }
    out
}

/// Solves from the model's start state and initial context over its horizon.
pub fn solve_exact(model: &GameModel, x0: usize, b0: &Belief) -> Result<Solution> {
    solve_from(model, x0, &model.human_model().initial_context(), b0, model.horizon(), SolveOptions::default())
}

/// Backward induction over all `(x, h, b, t)` nodes reachable from the given root.
pub fn solve_from(
    model: &GameModel,
    x0: usize,
    ctx0: &HumanContext,
    b0: &Belief,
    horizon: usize,
    opts: SolveOptions,
) -> Result<Solution> {
    if b0.len() != model.types().len() {
        return Err(Error::model("initial belief does not match the type space"));
    }
    if horizon == 0 || model.is_terminal(x0) {
        return Ok(Solution::default());
    }
    let nh = model.n_human();
    let root = NodeKey::new(x0, ctx0, b0, horizon);
    let mut levels: Vec<Vec<Expanded>> = Vec::new();
    let mut frontier = vec![(root.clone(), b0.clone())];
    let mut count = 1usize;
    while !frontier.is_empty() {
        let pending: Vec<_> = frontier.par_iter().map(|(k, b)| expand(model, k, b)).collect();
        let mut index: HashMap<NodeKey, usize> = HashMap::new();
        let mut next = Vec::new();
        let mut level = Vec::with_capacity(frontier.len());
        for ((key, belief), cells) in frontier.into_iter().zip(pending) {
            let trans = cells
                .into_iter()
                .map(|c| {
                    c.map(|(reward, prob, child)| {
                        let child = child.map(|(k, b)| {
                            *index.entry(k.clone()).or_insert_with(|| {
                                next.push((k, b));
                                next.len() - 1
                            })
                        });
                        Transition { reward, prob, child }
                    })
                })
                .collect();
            level.push(Expanded { key, belief, trans });
        }
        count += next.len();
        if count > opts.node_cap {
            return Err(Error::BeliefExplosion { count, cap: opts.node_cap });
        }
        levels.push(level);
        frontier = next;
    }
    log::debug!("belief DP: {count} nodes over {} levels", levels.len());

    let mut child_values: Vec<f64> = Vec::new();
    let mut entries = BTreeMap::new();
    let mut root_q = Vec::new();
    for (depth, level) in levels.iter().enumerate().rev() {
        let results: Vec<(Vec<f64>, usize, f64)> = level
            .par_iter()
            .map(|node| {
                let q: Vec<f64> = node
                    .trans
                    .chunks(nh)
                    .map(|row| {
                        row.iter()
                            .flatten()
                            .map(|tr| tr.reward + tr.child.map_or(0.0, |c| tr.prob * child_values[c]))
                            .sum()
                    })
                    .collect();
                let (a, v) = argmax_lowest(&q);
                (q, a, v)
            })
            .collect();
        child_values = results.iter().map(|r| r.2).collect();
        for (node, (q, a, v)) in level.iter().zip(results) {
            entries.insert(node.key.clone(), NodeEntry { belief: node.belief.clone(), action: a, value: v });
            if depth == 0 {
                root_q = q;
            }
        }
    }
    Ok(Solution { value: child_values[0], root_q, root: Some(root), entries })
}

/// Known-type value by plain two-player DP with `πᴴ` fixed to type `y`.
///
/// Only valid for static type spaces and context-free human models; used as
/// an independent cross-check.
pub fn known_type_value(model: &GameModel, x0: usize, y: usize, horizon: usize) -> f64 {
    let n = model.n_states();
    let ctx = model.human_model().initial_context();
    let mut v = vec![0.0; n];
    for _ in 0..horizon {
        let mut nv = vec![0.0; n];
        for (s, slot) in nv.iter_mut().enumerate().filter(|(s, _)| !model.is_terminal(*s)) {
            *slot = (0..model.n_robot())
                .map(|a_r| {
                    let dist = model.human_model().action_distribution(model, s, &ctx, a_r, y);
                    dist.iter()
                        .enumerate()
                        .filter(|(_, p)| **p > 0.0)
                        .map(|(a_h, p)| p * (model.planning_reward(s, a_r, a_h, y) + v[model.next_state(s, a_r, a_h)]))
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
        }
        v = nv;
    }
    v[x0]
}
