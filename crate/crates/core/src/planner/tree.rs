use std::sync::Arc;

use serde::Serialize;

use super::{PolicyRunner, RobotPolicy};
use crate::error::Result;
use crate::game::{belief_update, Belief, GameModel, HumanContext};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolicyTreeNode {
    /// `None` at terminal states or when no steps remain.
    pub action: Option<usize>,
    pub belief: Vec<f64>,
    pub state: Vec<u32>,
    #[serde(skip)]
    pub x: usize,
    pub depth: usize,
    pub children: Vec<TreeEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeEdge {
    pub human_action: usize,
    pub disagree: bool,
    pub node: PolicyTreeNode,
}

impl PolicyTreeNode {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.node.size()).sum::<usize>()
    }

    /// Pre-order walk with the parent of each node.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(Option<(&'a PolicyTreeNode, &'a TreeEdge)>, &'a PolicyTreeNode)) {
        f(None, self);
        self.walk_children(f);
    }

    fn walk_children<'a>(&'a self, f: &mut impl FnMut(Option<(&'a PolicyTreeNode, &'a TreeEdge)>, &'a PolicyTreeNode)) {
        for e in &self.children {
            f(Some((self, e)), &e.node);
            e.node.walk_children(f);
        }
    }
}

/// Unrolls the policy from `(x0, b0)` over every human action with positive
/// probability, up to `depth` robot decisions deep.
pub fn extract_policy_tree(
    policy: Arc<RobotPolicy>,
    model: Arc<GameModel>,
    x0: usize,
    b0: &Belief,
    depth: usize,
) -> Result<PolicyTreeNode> {
    let depth = depth.min(model.horizon());
    let runner = PolicyRunner::new(policy, model.clone());
    let ctx = model.human_model().initial_context();
    build(&model, runner, x0, &ctx, b0, 0, depth)
}

fn build(
    model: &GameModel,
    mut runner: PolicyRunner,
    x: usize,
    ctx: &HumanContext,
    b: &Belief,
    d: usize,
    depth: usize,
) -> Result<PolicyTreeNode> {
    let t = model.horizon() - d;
    let mut node = PolicyTreeNode {
        action: None,
        belief: b.probs().to_vec(),
        state: model.world_state(x).0,
        x,
        depth: d,
        children: Vec::new(),
    };
    if t == 0 || model.is_terminal(x) {
        return Ok(node);
    }
    let a_r = runner.decide(x, ctx, b, t)?;
    node.action = Some(a_r);
    if d == depth {
        return Ok(node);
    }
    for a_h in 0..model.n_human() {
        let lik = model.human_model().likelihoods(model, x, ctx, a_r, a_h);
        let p: f64 = b.probs().iter().zip(&lik).map(|(p, l)| p * l).sum();
        if p <= 0.0 {
            continue;
        }
        let b2 = belief_update(b, x, a_r, a_h, model, ctx)?;
        let ctx2 = model.human_model().next_context(ctx, x, a_r, a_h);
        let mut child_runner = runner.clone();
        child_runner.observe(x, a_r, a_h)?;
        let child = build(model, child_runner, model.next_state(x, a_r, a_h), &ctx2, &b2, d + 1, depth)?;
        node.children.push(TreeEdge { human_action: a_h, disagree: model.disagree(x, a_r, a_h), node: child });
    }
    Ok(node)
}
