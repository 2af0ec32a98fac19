//! Benchmark fixtures shared by the criterion targets.

use coadapt_core::envs::{build_model, EnvConfig, HumanConfig};
use coadapt_core::GameModel;

/// Shared-autonomy over the default five-point adaptability grid.
pub fn shared_autonomy(horizon: usize) -> GameModel {
    build_model(&EnvConfig::named("shared-autonomy").with_horizon(horizon), &HumanConfig::model("bam"))
        .expect("valid builtin")
}

pub fn table_carrying(horizon: usize) -> GameModel {
    build_model(&EnvConfig::named("table-carrying").with_horizon(horizon), &HumanConfig::model("bam"))
        .expect("valid builtin")
}
