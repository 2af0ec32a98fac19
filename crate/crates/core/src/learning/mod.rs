//! Robot adaptation from demonstrations: cross-training on role-swappable
//! tasks, type discovery by clustering, and per-type model fitting.

mod clustering;
mod cross_training;
mod demos;
mod fitting;

pub use clustering::{assignment_accuracy, cluster_types, demo_features, Clustering, KMEANS_RESTARTS};
pub use cross_training::{cross_train, evaluate_table, plan_table, CrossTrainResult, RoundLog};
pub use demos::{generate_demonstrations, read_demonstrations, write_demonstrations, DemoStep, Demonstration, Phase};
pub use fitting::{
    fit_type_models, infer_type, reward_log_likelihood, steps_to_confidence, with_fitted_types, TypeModelSet,
    TYPE_MODEL_VERSION,
};

use crate::game::GameModel;

/// Pseudo-count added to every action when fitting policy tables.
pub const DEFAULT_SMOOTHING: f64 = 1.0;

/// Row-normalized `counts[s * nH + aH]` after adding `pseudo` to every cell.
/// Rows with no mass at all become uniform.
pub(crate) fn smoothed_table(model: &GameModel, counts: &[f64], pseudo: f64) -> Vec<f64> {
    let nh = model.n_human();
    counts
        .chunks(nh)
        .flat_map(|row| {
            let total: f64 = row.iter().map(|c| c + pseudo).sum();
            row.iter()
                .map(move |c| if total > 0.0 { (c + pseudo) / total } else { 1.0 / nh as f64 })
                .collect::<Vec<_>>()
        })
        .collect()
}
