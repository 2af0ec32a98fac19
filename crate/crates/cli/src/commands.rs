use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use coadapt_core::config::Config;
use coadapt_core::envs::build_model;
use coadapt_core::game::Belief;
use coadapt_core::harness::{
    compute_metrics, episode_seed, run_dir, run_episode, run_population, sample_type, summarize, to_csv,
    write_population, EpisodeSetup,
};
use coadapt_core::learning::{
    cluster_types, cross_train, fit_type_models, generate_demonstrations, infer_type, read_demonstrations,
    steps_to_confidence, write_demonstrations, Demonstration,
};
use coadapt_core::planner::{extract_policy_tree, policy_for, to_dot, Condition, PolicyFile};

use crate::UsageError;

/// Inputs shared by every config-driven command.
#[derive(Clone, Debug, Default)]
pub struct ConfigArgs {
    pub config: PathBuf,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

impl ConfigArgs {
    pub fn load(&self) -> Result<Config> {
        let text = fs::read_to_string(&self.config)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", self.config.display())))?;
        let mut cfg = Config::from_json(&text, &self.overrides)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Solves the configured game and writes `<out>/policy.json`.
pub fn solve(args: &ConfigArgs, out: &Path) -> Result<Value> {
    let cfg = args.load()?;
    let model = cfg.model()?;
    let b0 = cfg.initial_belief(&model)?;
    let condition: Condition = cfg.simulate.condition.parse()?;
    let policy = policy_for(&model, condition, &b0, cfg.solve_options()?)?;
    let file = PolicyFile::from_policy(&policy, &cfg.environment, &cfg.human_model, &b0);
    fs::create_dir_all(out)?;
    let path = out.join("policy.json");
    write_json(&path, &file)?;
    Ok(json!({
        "command": "solve",
        "condition": condition,
        "value": policy.value(),
        "entries": file.entries.len(),
        "policy": path,
    }))
}

/// Renders the policy tree of a saved policy as DOT.
pub fn tree(policy_path: &Path, depth: usize, dot_path: &Path) -> Result<Value> {
    let text = fs::read_to_string(policy_path)
        .map_err(|e| UsageError(format!("cannot read policy {}: {e}", policy_path.display())))?;
    let file: PolicyFile = serde_json::from_str(&text)?;
    let model = Arc::new(build_model(&file.environment, &file.human_model)?);
    let policy = Arc::new(file.to_policy(&model)?);
    let b0 = Belief::new(file.initial_belief.clone())?;
    let root = extract_policy_tree(policy, model.clone(), model.start(), &b0, depth)?;
    if let Some(dir) = dot_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(dot_path, to_dot(&root, &model))?;
    Ok(json!({ "command": "tree", "depth": depth, "nodes": root.size(), "dot": dot_path }))
}

/// Runs `simulate.episodes` closed-loop episodes of one condition.
pub fn simulate(args: &ConfigArgs, out: &Path) -> Result<Value> {
    let cfg = args.load()?;
    let model = Arc::new(cfg.model()?);
    let b0 = cfg.initial_belief(&model)?;
    let condition: Condition = cfg.simulate.condition.parse()?;
    if let Some(y) = cfg.simulate.true_type.filter(|y| *y >= model.types().len()) {
        return Err(UsageError(format!("simulate.true_type {y} is outside the type space")).into());
    }
    let policy = Arc::new(policy_for(&model, condition, &b0, cfg.solve_options()?)?);
    let traces = (0..cfg.simulate.episodes as u64)
        .into_par_iter()
        .map(|i| {
            let seed = episode_seed(cfg.seed, i);
            let y0 = cfg.simulate.true_type.unwrap_or_else(|| sample_type(&b0, seed));
            let setup = EpisodeSetup {
                x0: model.start(),
                y0,
                b0: b0.clone(),
                seed,
                condition: condition.to_string(),
                on_zero: Default::default(),
            };
            run_episode(&model, &policy, &setup)
        })
        .collect::<coadapt_core::Result<Vec<_>>>()?;
    let dir = run_dir(out, &cfg)?;
    let tdir = dir.join("traces").join(condition.as_str());
    fs::create_dir_all(&tdir)?;
    for (i, tr) in traces.iter().enumerate() {
        fs::write(tdir.join(format!("{i:05}.jsonl")), tr.to_jsonl())?;
    }
    let records: Vec<_> = traces.iter().map(|t| compute_metrics(t, &model)).collect();
    let summary = summarize(condition.as_str(), &records);
    write_json(&dir.join("config.json"), &cfg)?;
    write_json(&dir.join("summary.json"), &summary)?;
    fs::write(dir.join("metrics.csv"), to_csv(std::slice::from_ref(&summary)))?;
    Ok(json!({ "command": "simulate", "run_dir": dir, "summary": summary }))
}

/// Runs every configured condition against the same population.
pub fn population(args: &ConfigArgs, out: &Path) -> Result<Value> {
    let cfg = args.load()?;
    let model = Arc::new(cfg.model()?);
    let report = run_population(&model, &cfg.population, cfg.seed, cfg.solve_options()?)?;
    let dir = run_dir(out, &cfg)?;
    write_json(&dir.join("config.json"), &cfg)?;
    write_population(&dir, &report, cfg.population.write_traces)?;
    Ok(json!({ "command": "population", "run_dir": dir, "summary": report }))
}

/// Cross-trains against a simulated human of type `cross_train.planted`.
pub fn crosstrain(args: &ConfigArgs, out: &Path) -> Result<Value> {
    let cfg = args.load()?;
    let model = cfg.model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let result = cross_train(&model, cfg.cross_train.planted, cfg.cross_train.rounds, &mut rng)?;
    let dir = run_dir(out, &cfg)?;
    write_json(&dir.join("config.json"), &cfg)?;
    let mut demos = Vec::new();
    write_demonstrations(&result.demonstrations, &mut demos)?;
    fs::write(dir.join("demonstrations.jsonl"), demos)?;
    let mut report = serde_json::to_value(&result)?;
    report.as_object_mut().expect("struct serializes to an object").remove("demonstrations");
    write_json(&dir.join("cross_train.json"), &report)?;
    Ok(json!({
        "command": "cross-train",
        "run_dir": dir,
        "planted": result.planted,
        "reward_estimate": result.reward_estimate,
        "reward_label": result.reward_label,
        "values": result.rounds.iter().map(|r| r.value).collect::<Vec<_>>(),
    }))
}

/// Clusters demonstrations into types, fits per-type models and scores
/// online type inference on held-out simulated users.
pub fn cluster(args: &ConfigArgs, out: &Path) -> Result<Value> {
    let cfg = args.load()?;
    let model = cfg.model()?;
    let cc = &cfg.cluster;
    if let Some(y) = cc.planted.iter().find(|y| **y >= model.types().len()) {
        return Err(UsageError(format!("cluster.planted type {y} is outside the type space")).into());
    }
    let (demos, truth): (Vec<Demonstration>, Option<Vec<usize>>) = match &cc.demos {
        Some(path) => {
            let f = fs::File::open(path)
                .map_err(|e| UsageError(format!("cannot read demonstrations {}: {e}", path.display())))?;
            (read_demonstrations(BufReader::new(f))?, None)
        }
        None => {
            let truth: Vec<usize> =
                (0..cc.demos_per_type * cc.planted.len()).map(|i| cc.planted[i % cc.planted.len()]).collect();
            (generate_demonstrations(&model, &truth, cfg.seed), Some(truth))
        }
    };
    let clustering = cluster_types(&model, &demos, cc.k, cfg.seed)?;
    let fitted = fit_type_models(&model, &demos, &clustering.assignments, cc.k, cc.smoothing)?;
    let dir = run_dir(out, &cfg)?;
    write_json(&dir.join("config.json"), &cfg)?;
    write_json(&dir.join("type_models.json"), &fitted)?;
    write_json(&dir.join("clustering.json"), &clustering)?;
    let mut buf = Vec::new();
    write_demonstrations(&demos, &mut buf)?;
    fs::write(dir.join("demonstrations.jsonl"), buf)?;

    let mut summary = json!({
        "command": "cluster",
        "run_dir": dir,
        "k": cc.k,
        "demonstrations": demos.len(),
        "inertia": clustering.inertia,
        "reward_params": fitted.reward_params,
    });
    if let Some(truth) = truth {
        let accuracy = coadapt_core::learning::assignment_accuracy(&clustering.assignments, &truth, cc.k);
        let held: Vec<usize> = (0..cc.held_out).map(|i| cc.planted[i % cc.planted.len()]).collect();
        let held_demos = generate_demonstrations(&model, &held, cfg.seed ^ 0x5eed);
        let fitted_model = fitted.to_model(&model)?;
        let label = majority_cluster(&clustering.assignments, &truth, cc.k);
        let b0 = Belief::uniform(cc.k);
        let mut confident = 0usize;
        for (d, y) in held_demos.iter().zip(&held) {
            let beliefs = infer_type(&fitted_model, &d.indexed(&model)?, &b0)?;
            if steps_to_confidence(&beliefs, label[*y], cc.threshold).is_some_and(|n| n <= cc.max_steps) {
                confident += 1;
            }
        }
        let rate = if held.is_empty() { 0.0 } else { confident as f64 / held.len() as f64 };
        summary["accuracy"] = json!(accuracy);
        summary["online_identification_rate"] = json!(rate);
        write_json(&dir.join("evaluation.json"), &json!({ "accuracy": accuracy, "online_identification_rate": rate }))?;
    }
    Ok(summary)
}

/// Cluster holding most demonstrations of each true type.
pub fn majority_cluster(assignments: &[usize], truth: &[usize], k: usize) -> Vec<usize> {
    let n_types = truth.iter().copied().max().map_or(0, |m| m + 1);
    (0..n_types)
        .map(|y| {
            let mut counts = vec![0usize; k];
            for (a, t) in assignments.iter().zip(truth) {
                if *t == y {
                    counts[*a] += 1;
                }
            }
            (0..k).fold(0, |best, c| if counts[c] > counts[best] { c } else { best })
        })
        .collect()
}
