#![allow(dead_code)]

use coadapt_core::envs::{build_model, EnvConfig, HumanConfig};
use coadapt_core::game::{GameModel, HumanType, TypeSpace};
use rand::Rng;
use serde_json::json;

pub fn env(name: &str, params: serde_json::Value, horizon: usize, human: HumanConfig) -> GameModel {
    build_model(&EnvConfig::named(name).with_params(params).with_horizon(horizon), &human).unwrap()
}

pub fn alphas(grid: &[f64]) -> HumanConfig {
    HumanConfig { alpha_grid: Some(grid.to_vec()), ..HumanConfig::model("bam") }
}

pub fn shared_autonomy(horizon: usize, grid: &[f64]) -> GameModel {
    env("shared-autonomy", json!({}), horizon, alphas(grid))
}

pub fn table_carrying(horizon: usize, grid: &[f64]) -> GameModel {
    env("table-carrying", json!({"n_rot": 8}), horizon, alphas(grid))
}

pub fn table_clearing(horizon: usize) -> GameModel {
    env("table-clearing", json!({"prior_naive": 0.5}), horizon, HumanConfig::default())
}

/// Same model with a random type kernel.
pub fn with_random_kernel<R: Rng>(model: &GameModel, rng: &mut R) -> GameModel {
    let mut parts = model.clone().into_parts();
    let n = parts.types.len();
    let types: Vec<HumanType> = parts.types.types().to_vec();
    let rows = (0..n)
        .map(|_| {
            (0..parts.robot_actions.len())
                .map(|_| {
                    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.05).collect();
                    let z: f64 = w.iter().sum();
                    w.into_iter().map(|v| v / z).collect()
                })
                .collect()
        })
        .collect();
    parts.types = TypeSpace::with_kernel(types, rows).unwrap();
    GameModel::new(parts).unwrap()
}
