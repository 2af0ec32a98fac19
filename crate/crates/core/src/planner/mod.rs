//! Robot policies: exact belief-space planning, a brute-force oracle,
//! baselines, policy trees and the teaching check.

mod baselines;
mod dot;
mod exact;
mod oracle;
mod policy_file;
mod teaching;
mod tree;

pub use baselines::{assistant_model, no_adaptation_table};
pub use dot::{belief_shade, to_dot};
pub use exact::{
    argmax_lowest, known_type_value, solve_exact, solve_from, NodeEntry, NodeKey, Solution, SolveOptions,
    DEFAULT_NODE_CAP, TIE_TOL,
};
pub use oracle::{brute_force_root_q, brute_force_value, brute_force_value_capped, DEFAULT_LEAF_CAP};
pub use policy_file::{PolicyEntry, PolicyFile, POLICY_FILE_VERSION};
pub use teaching::{teaching_action_check, TeachingReport};
pub use tree::{extract_policy_tree, PolicyTreeNode};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{belief_update_with, Belief, GameModel, HumanContext, ZeroLikelihoodPolicy};

/// The three experimental conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    NoAdaptation,
    RobotAdaptationOnly,
    MutualAdaptation,
}

impl Condition {
    pub const ALL: [Condition; 3] =
        [Condition::NoAdaptation, Condition::RobotAdaptationOnly, Condition::MutualAdaptation];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::NoAdaptation => "no-adaptation",
            Condition::RobotAdaptationOnly => "robot-adaptation-only",
            Condition::MutualAdaptation => "mutual-adaptation",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| Error::BadCondition(s.to_string()))
    }
}

/// A robot policy over `(x, h, b, t)`.
#[derive(Clone, Debug)]
pub enum RobotPolicy {
    /// Optimal policy from belief-space DP; nodes missing from the table are
    /// solved on demand.
    Exact { solution: Solution, opts: SolveOptions },
    /// `table[t][x]`, ignoring the human entirely.
    NoAdaptation { table: Vec<Vec<usize>> },
    /// Assists the inferred human preference in a derived leader-assistant
    /// model, tracking its own belief over that model's types.
    RobotAdaptationOnly { derived: Arc<GameModel>, solution: Solution, opts: SolveOptions },
}

impl RobotPolicy {
    pub fn provenance(&self) -> &'static str {
        match self {
            RobotPolicy::Exact { .. } => "exact-dp",
            RobotPolicy::NoAdaptation { .. } => "no-adaptation",
            RobotPolicy::RobotAdaptationOnly { .. } => "robot-adaptation-only",
        }
    }

    /// Planned value at the root, where one exists.
    pub fn value(&self) -> Option<f64> {
        match self {
            RobotPolicy::Exact { solution, .. } | RobotPolicy::RobotAdaptationOnly { solution, .. } => {
                Some(solution.value)
            }
            RobotPolicy::NoAdaptation { .. } => None,
        }
    }
}

/// Optimal mutual-adaptation policy for prior `b0`.
pub fn mutual_adaptation(model: &GameModel, b0: &Belief, opts: SolveOptions) -> Result<RobotPolicy> {
    let solution = solve_from(model, model.start(), &model.human_model().initial_context(), b0, model.horizon(), opts)?;
    Ok(RobotPolicy::Exact { solution, opts })
}

pub fn baseline_no_adaptation(model: &GameModel) -> RobotPolicy {
    RobotPolicy::NoAdaptation { table: no_adaptation_table(model) }
}

pub fn baseline_robot_adaptation_only(model: &GameModel) -> Result<RobotPolicy> {
    baseline_robot_adaptation_only_with(model, SolveOptions::default())
}

pub fn baseline_robot_adaptation_only_with(model: &GameModel, opts: SolveOptions) -> Result<RobotPolicy> {
    let derived = assistant_model(model)?;
    let solution = baselines::solve_assistant(&derived, opts)?;
    Ok(RobotPolicy::RobotAdaptationOnly { derived: Arc::new(derived), solution, opts })
}

pub fn policy_for(model: &GameModel, condition: Condition, b0: &Belief, opts: SolveOptions) -> Result<RobotPolicy> {
    match condition {
        Condition::NoAdaptation => Ok(baseline_no_adaptation(model)),
        Condition::RobotAdaptationOnly => baseline_robot_adaptation_only_with(model, opts),
        Condition::MutualAdaptation => mutual_adaptation(model, b0, opts),
    }
}

/// Executes a [`RobotPolicy`] step by step within one episode.
#[derive(Clone, Debug)]
pub struct PolicyRunner {
    policy: Arc<RobotPolicy>,
    model: Arc<GameModel>,
    cache: HashMap<NodeKey, usize>,
    assist: Option<(Belief, HumanContext)>,
}

impl PolicyRunner {
    pub fn new(policy: Arc<RobotPolicy>, model: Arc<GameModel>) -> Self {
        let assist = match policy.as_ref() {
            RobotPolicy::RobotAdaptationOnly { derived, .. } => {
                Some((Belief::uniform(derived.types().len()), derived.human_model().initial_context()))
            }
            _ => None,
        };
        PolicyRunner { policy, model, cache: HashMap::new(), assist }
    }

    pub fn policy(&self) -> &RobotPolicy {
        &self.policy
    }

    /// The runner's own belief, for policies that keep one.
    pub fn internal_belief(&self) -> Option<&Belief> {
        self.assist.as_ref().map(|(b, _)| b)
    }

    #[allow(clippy::too_many_arguments)]
    fn lookup(
        cache: &mut HashMap<NodeKey, usize>,
        model: &GameModel,
        solution: &Solution,
        opts: SolveOptions,
        x: usize,
        ctx: &HumanContext,
        b: &Belief,
        t: usize,
    ) -> Result<usize> {
        let key = NodeKey::new(x, ctx, b, t);
        if let Some(a) = solution.action(&key).or_else(|| cache.get(&key).copied()) {
            return Ok(a);
        }
        log::debug!("policy miss at x={x} t={t}; solving on demand");
        let sol = solve_from(model, x, ctx, b, t, opts)?;
        for (k, e) in &sol.entries {
            cache.insert(k.clone(), e.action);
        }
        Ok(sol.root_action().unwrap_or(0))
    }

    /// Robot action at world state `x` with `t` steps to go.
    pub fn decide(&mut self, x: usize, ctx: &HumanContext, b: &Belief, t: usize) -> Result<usize> {
        match self.policy.as_ref() {
            RobotPolicy::Exact { solution, opts } => {
                Self::lookup(&mut self.cache, &self.model, solution, *opts, x, ctx, b, t)
            }
            RobotPolicy::NoAdaptation { table } => Ok(table.get(t).map_or(0, |row| row[x])),
            RobotPolicy::RobotAdaptationOnly { derived, solution, opts } => {
                let (bd, cd) = self.assist.as_ref().expect("assist state exists for this policy");
                Self::lookup(&mut self.cache, derived, solution, *opts, x, cd, bd, t)
            }
        }
    }

    /// Feeds the observed step to policies that track their own state.
    pub fn observe(&mut self, x: usize, a_r: usize, a_h: usize) -> Result<()> {
        if let (RobotPolicy::RobotAdaptationOnly { derived, .. }, Some((b, ctx))) =
            (self.policy.as_ref(), self.assist.as_mut())
        {
            let nb = belief_update_with(b, x, a_r, a_h, derived, ctx, ZeroLikelihoodPolicy::Reseed)?;
            *ctx = derived.human_model().next_context(ctx, x, a_r, a_h);
            *b = nb;
        }
        Ok(())
    }
}
