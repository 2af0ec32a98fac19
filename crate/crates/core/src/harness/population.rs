use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::episode::{episode_seed, run_episode, EpisodeSetup};
use super::metrics::{compute_metrics, summarize, to_csv, ConditionSummary};
use crate::error::{Error, Result};
use crate::game::{Belief, EpisodeTrace, GameModel};
use crate::human::sample_index;
use crate::planner::{policy_for, Condition, SolveOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationConfig {
    pub conditions: Vec<String>,
    /// Weights over the type space; `None` means uniform.
    pub mixture: Option<Vec<f64>>,
    pub episodes: usize,
    pub write_traces: bool,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            conditions: Condition::ALL.iter().map(|c| c.to_string()).collect(),
            mixture: None,
            episodes: 1000,
            write_traces: true,
        }
    }
}

impl PopulationConfig {
    pub fn parsed_conditions(&self) -> Result<Vec<Condition>> {
        if self.conditions.is_empty() {
            return Err(Error::params("conditions", "name at least one condition"));
        }
        self.conditions.iter().map(|c| c.parse()).collect()
    }

    pub fn mixture_belief(&self, n_types: usize) -> Result<Belief> {
        match &self.mixture {
            None => Ok(Belief::uniform(n_types)),
            Some(w) if w.len() == n_types && w.iter().all(|v| v.is_finite() && *v >= 0.0) => {
                Belief::from_weights(w.clone()).ok_or_else(|| Error::params("mixture", "weights sum to zero"))
            }
            Some(_) => Err(Error::params("mixture", format!("need {n_types} non-negative weights"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PopulationReport {
    pub seed: u64,
    pub mixture: Vec<f64>,
    pub rows: Vec<ConditionSummary>,
    #[serde(skip)]
    pub traces: Vec<(String, Vec<EpisodeTrace>)>,
}

impl PopulationReport {
    pub fn row(&self, condition: Condition) -> Option<&ConditionSummary> {
        self.rows.iter().find(|r| r.condition == condition.as_str())
    }
}

/// Draws episode `i`'s true type from the mixture.
pub fn sample_type(mixture: &Belief, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    sample_index(mixture.probs(), &mut rng)
}

/// Runs every condition against the same sequence of simulated humans.
///
/// The mutual-adaptation planner starts from the population mixture as its
/// prior; the baselines ignore it.
pub fn run_population(
    model: &Arc<GameModel>,
    cfg: &PopulationConfig,
    seed: u64,
    opts: SolveOptions,
) -> Result<PopulationReport> {
    let conditions = cfg.parsed_conditions()?;
    if cfg.episodes == 0 {
        return Err(Error::params("episodes", "must be at least 1"));
    }
    let mixture = cfg.mixture_belief(model.types().len())?;
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for cond in conditions {
        let policy = Arc::new(policy_for(model, cond, &mixture, opts)?);
        log::info!("population: {cond} ({} episodes)", cfg.episodes);
        let eps: Vec<EpisodeTrace> = (0..cfg.episodes as u64)
            .into_par_iter()
            .map(|i| {
                let s = episode_seed(seed, i);
                let setup = EpisodeSetup {
                    x0: model.start(),
                    y0: sample_type(&mixture, s),
                    b0: mixture.clone(),
                    seed: s,
                    condition: cond.to_string(),
                    on_zero: Default::default(),
                };
                run_episode(model, &policy, &setup)
            })
            .collect::<Result<_>>()?;
        let records: Vec<_> = eps.iter().map(|t| compute_metrics(t, model)).collect();
        rows.push(summarize(cond.as_str(), &records));
        traces.push((cond.to_string(), eps));
    }
    Ok(PopulationReport { seed, mixture: mixture.into_vec(), rows, traces })
}

/// Hex SHA-256 of a serializable config.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// `<out>/<first 16 hex digits of the config hash>`, created if missing.
pub fn run_dir<T: Serialize>(out: &Path, cfg: &T) -> Result<PathBuf> {
    let dir = out.join(&config_hash(cfg)?[..16]);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Writes `metrics.csv`, `summary.json` and, if requested, one JSONL file per
/// episode under `traces/<condition>/`.
pub fn write_population(dir: &Path, report: &PopulationReport, write_traces: bool) -> Result<()> {
    fs::write(dir.join("metrics.csv"), to_csv(&report.rows))?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(report)? + "\n")?;
    if write_traces {
        for (cond, eps) in &report.traces {
            let tdir = dir.join("traces").join(cond);
            fs::create_dir_all(&tdir)?;
            for (i, tr) in eps.iter().enumerate() {
                fs::write(tdir.join(format!("{i:05}.jsonl")), tr.to_jsonl())?;
            }
        }
    }
    Ok(())
}
