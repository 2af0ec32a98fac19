//! Closed-loop simulation, population experiments and metrics.

mod episode;
mod metrics;
mod population;

pub use episode::{episode_seed, evaluate_policy_pair, run_episode, EpisodeSetup};
pub use metrics::{compute_metrics, final_state, summarize, to_csv, ConditionSummary, MetricRecord, Stat, CSV_HEADER};
pub use population::{
    config_hash, run_dir, run_population, sample_type, write_population, PopulationConfig, PopulationReport,
};
