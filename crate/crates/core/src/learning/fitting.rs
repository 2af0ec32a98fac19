use serde::{Deserialize, Serialize};

use super::{smoothed_table, Demonstration};
use crate::error::{Error, Result};
use crate::game::{belief_update, Belief, GameModel, HumanType, TypeSpace};
use crate::human::{best_response, FixedPolicies, HumanModel};

pub const TYPE_MODEL_VERSION: u32 = 1;

/// Mass a best-responding demonstrator spreads over all actions when the
/// environment has no role-swap demonstrator model.
const RESPONSE_NOISE: f64 = 0.1;

/// Fitted per-type human models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeModelSet {
    pub version: u32,
    pub env: String,
    /// `policies[y][s * nH + aH]`.
    pub policies: Vec<Vec<f64>>,
    /// Index into the environment's reward family, per type.
    pub reward_params: Vec<usize>,
    pub reward_labels: Vec<String>,
    /// Cluster of each training demonstration.
    pub assignments: Vec<usize>,
}

impl TypeModelSet {
    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    /// `base` with its types replaced by the fitted ones and a uniform prior.
    pub fn to_model(&self, base: &GameModel) -> Result<GameModel> {
        if self.version != TYPE_MODEL_VERSION {
            return Err(Error::params("version", format!("unsupported type model version {}", self.version)));
        }
        if self.env != base.env() {
            return Err(Error::model(format!("type models fitted for `{}`, not `{}`", self.env, base.env())));
        }
        with_fitted_types(base, self.policies.clone(), &self.reward_params)
    }
}

/// Replaces the types of `base` with fixed policies `policies[y]` and reward
/// parameters `reward_params[y]`.
pub fn with_fitted_types(base: &GameModel, policies: Vec<Vec<f64>>, reward_params: &[usize]) -> Result<GameModel> {
    let mut parts = base.clone().into_parts();
    let n = policies.len();
    if n == 0 || reward_params.len() != n {
        return Err(Error::model("need one reward parameter per fitted policy"));
    }
    let types = reward_params
        .iter()
        .enumerate()
        .map(|(id, &p)| HumanType { id, label: format!("cluster-{id}"), adaptability: 0.0, reward_param: p })
        .collect();
    parts.types = TypeSpace::fixed(types, parts.robot_actions.len());
    parts.human_model = HumanModel::Fixed(FixedPolicies { n_human: parts.human_actions.len(), tables: policies });
    parts.initial_belief = vec![1.0 / n as f64; n];
    GameModel::new(parts)
}

/// Log-likelihood of demonstrated actions under reward parameterization `param`.
///
/// Environments with a role-swap demonstrator use its noisy preference
/// policy; others use a noisy best response to the robot's action.
pub fn reward_log_likelihood(model: &GameModel, param: usize, steps: &[(usize, usize, usize)]) -> f64 {
    let nh = model.n_human();
    steps
        .iter()
        .map(|&(x, a_r, a_h)| {
            let p = match model.role_swap() {
                Some(rs) => rs.policy(param, x, nh)[a_h],
                None => {
                    let hit = if best_response(model, x, a_r, param) == a_h { 1.0 - RESPONSE_NOISE } else { 0.0 };
                    hit + RESPONSE_NOISE / nh as f64
                }
            };
            p.ln()
        })
        .sum()
}

/// Maximum-likelihood reward parameter (lowest index on ties) and the
/// log-likelihood of every candidate.
pub(crate) fn ml_reward(model: &GameModel, steps: &[(usize, usize, usize)]) -> (usize, Vec<f64>) {
    let ll: Vec<f64> = (0..model.rewards().param_count()).map(|p| reward_log_likelihood(model, p, steps)).collect();
    let best = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (ll.iter().position(|v| *v == best).unwrap_or(0), ll)
}

/// Fits one policy table and one reward parameter per cluster.
pub fn fit_type_models(
    model: &GameModel,
    demos: &[Demonstration],
    assignment: &[usize],
    k: usize,
    smoothing: f64,
) -> Result<TypeModelSet> {
    if assignment.len() != demos.len() {
        return Err(Error::model("assignment length differs from the number of demonstrations"));
    }
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(Error::params("smoothing", "must be a non-negative number"));
    }
    let indexed: Vec<_> = demos.iter().map(|d| d.indexed(model)).collect::<Result<_>>()?;
    let nh = model.n_human();
    let mut policies = Vec::with_capacity(k);
    let mut reward_params = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<&Vec<(usize, usize, usize)>> =
            indexed.iter().zip(assignment).filter(|(_, a)| **a == c).map(|(d, _)| d).collect();
        if members.is_empty() {
            return Err(Error::EmptyCluster(c));
        }
        let mut counts = vec![0.0; model.n_states() * nh];
        for &(x, _, a_h) in members.iter().copied().flatten() {
            counts[x * nh + a_h] += 1.0;
        }
        policies.push(smoothed_table(model, &counts, smoothing));
        let all: Vec<_> = members.into_iter().flatten().copied().collect();
        reward_params.push(ml_reward(model, &all).0);
    }
    let labels = model.rewards().param_labels();
    Ok(TypeModelSet {
        version: TYPE_MODEL_VERSION,
        env: model.env().to_string(),
        reward_labels: reward_params.iter().map(|p| labels.get(*p).cloned().unwrap_or_default()).collect(),
        policies,
        reward_params,
        assignments: assignment.to_vec(),
    })
}

/// Online type posterior after each observed step, starting from `b0`.
pub fn infer_type(fitted: &GameModel, steps: &[(usize, usize, usize)], b0: &Belief) -> Result<Vec<Belief>> {
    let mut ctx = fitted.human_model().initial_context();
    let mut b = b0.clone();
    let mut out = Vec::with_capacity(steps.len());
    for &(x, a_r, a_h) in steps {
        b = belief_update(&b, x, a_r, a_h, fitted, &ctx)?;
        ctx = fitted.human_model().next_context(&ctx, x, a_r, a_h);
        out.push(b.clone());
    }
    Ok(out)
}

/// Number of observed steps until `beliefs[.][y] ≥ threshold`, if ever.
pub fn steps_to_confidence(beliefs: &[Belief], y: usize, threshold: f64) -> Option<usize> {
    beliefs.iter().position(|b| b.probs()[y] >= threshold).map(|i| i + 1)
}
