mod common;

use std::sync::Arc;

use coadapt_core::game::{accumulate_reward, Agent, Belief, EpisodeTrace, TraceStep};
use coadapt_core::harness::{
    compute_metrics, episode_seed, evaluate_policy_pair, run_dir, run_episode, run_population, write_population,
    EpisodeSetup, PopulationConfig, CSV_HEADER,
};
use coadapt_core::planner::{mutual_adaptation, policy_for, Condition, SolveOptions};
use coadapt_core::Error;
use common::*;
use serde_json::json;

fn pure(n: usize, y: usize, episodes: usize) -> PopulationConfig {
    PopulationConfig {
        mixture: Some((0..n).map(|i| if i == y { 1.0 } else { 0.0 }).collect()),
        episodes,
        write_traces: false,
        ..Default::default()
    }
}

#[test]
fn equal_seeds_give_identical_traces() {
    let m = Arc::new(shared_autonomy(10, &[0.0, 0.5, 1.0]));
    let p = Arc::new(mutual_adaptation(&m, &Belief::uniform(3), SolveOptions::default()).unwrap());
    let mut setup = EpisodeSetup::new(&m, 1, 42);
    setup.b0 = Belief::uniform(3);
    let a = run_episode(&m, &p, &setup).unwrap().to_jsonl();
    let b = run_episode(&m, &p, &setup).unwrap().to_jsonl();
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn episode_traces_do_not_depend_on_population_size() {
    let m = Arc::new(shared_autonomy(10, &[0.0, 0.5, 1.0]));
    let small = run_population(&m, &PopulationConfig { episodes: 5, ..Default::default() }, 9, SolveOptions::default())
        .unwrap();
    let large =
        run_population(&m, &PopulationConfig { episodes: 40, ..Default::default() }, 9, SolveOptions::default())
            .unwrap();
    for ((c1, t1), (c2, t2)) in small.traces.iter().zip(&large.traces) {
        assert_eq!(c1, c2);
        for i in 0..5 {
            assert_eq!(t1[i].to_jsonl(), t2[i].to_jsonl());
        }
    }
    assert_ne!(episode_seed(9, 0), episode_seed(9, 1));
}

#[test]
fn mutual_adaptation_reaches_the_goals_of_each_extreme() {
    let m = Arc::new(shared_autonomy(10, &[0.0, 0.25, 0.5, 0.75, 1.0]));
    let n = m.types().len();
    for (y, robot_goal) in [(n - 1, true), (0, false)] {
        let rep = run_population(&m, &pure(n, y, 200), 3, SolveOptions::default()).unwrap();
        let mutual = rep.row(Condition::MutualAdaptation).unwrap();
        let rate = if robot_goal { mutual.robot_goal_rate.mean } else { mutual.human_goal_rate.mean };
        assert!(rate >= 0.95, "type {y}: {rate}");
        if robot_goal {
            let no = rep.row(Condition::NoAdaptation).unwrap();
            assert!(
                (mutual.robot_reward.mean - no.robot_reward.mean).abs()
                    <= mutual.robot_reward.stderr.max(no.robot_reward.stderr) + 1e-9
            );
        } else {
            let ro = rep.row(Condition::RobotAdaptationOnly).unwrap();
            assert!(
                (mutual.robot_reward.mean - ro.robot_reward.mean).abs()
                    <= mutual.robot_reward.stderr.max(ro.robot_reward.stderr) + 1e-9
            );
            assert!((mutual.human_goal_rate.mean - ro.human_goal_rate.mean).abs() <= 0.02);
        }
    }
}

#[test]
fn mixed_population_orders_the_conditions() {
    let m = Arc::new(shared_autonomy(10, &[0.0, 0.25, 0.5, 0.75, 1.0]));
    let rep = run_population(
        &m,
        &PopulationConfig { episodes: 1000, write_traces: false, ..Default::default() },
        1,
        SolveOptions::default(),
    )
    .unwrap();
    let no = rep.row(Condition::NoAdaptation).unwrap().robot_reward;
    let mu = rep.row(Condition::MutualAdaptation).unwrap().robot_reward;
    let ro = rep.row(Condition::RobotAdaptationOnly).unwrap().robot_reward;
    assert!(no.mean >= mu.mean);
    assert!(mu.mean - 3.0 * mu.stderr > ro.mean + 3.0 * ro.stderr, "{mu:?} vs {ro:?}");
}

#[test]
fn unknown_condition_is_rejected() {
    let m = Arc::new(shared_autonomy(4, &[0.0, 1.0]));
    let cfg = PopulationConfig { conditions: vec!["teleoperation".into()], ..Default::default() };
    assert!(matches!(run_population(&m, &cfg, 0, SolveOptions::default()), Err(Error::BadCondition(_))));
}

fn step(t: usize, x: Vec<u32>, a_r: usize, a_h: usize) -> TraceStep {
    TraceStep { t, x, a_r, a_h, belief: vec![1.0], r_r: 1.0, r_h: 0.5, y: 0 }
}

#[test]
fn metrics_on_hand_built_traces() {
    let m = table_carrying(8, &[0.0, 1.0]);
    let empty = compute_metrics(&EpisodeTrace::default(), &m);
    assert_eq!((empty.steps, empty.disagreements, empty.robot_reward, empty.human_reward), (0, 0, 0.0, 0.0));

    let s0 = m.world_state(m.start()).0;
    let agree: Vec<TraceStep> = (0..3).map(|t| step(t, s0.clone(), 2, 2)).collect();
    let r = compute_metrics(&EpisodeTrace { steps: agree, ..Default::default() }, &m);
    assert_eq!(r.disagreements, 0);
    assert_eq!(r.steps, 3);
    assert_eq!(r.robot_reward, 3.0);

    let mixed = vec![
        step(0, s0.clone(), 0, 1),
        step(1, s0.clone(), 1, 0),
        step(2, s0.clone(), 0, 0),
        step(3, s0.clone(), 2, 0),
    ];
    let r = compute_metrics(&EpisodeTrace { steps: mixed, ..Default::default() }, &m);
    assert_eq!(r.disagreements, 3);
}

#[test]
fn leader_assistant_rewards_coincide_on_traces() {
    let m = Arc::new(env("assembly", json!({}), 4, Default::default()));
    let b0 = Belief::uniform(3);
    let p = Arc::new(policy_for(&m, Condition::MutualAdaptation, &b0, SolveOptions::default()).unwrap());
    for seed in 0..20 {
        let setup = EpisodeSetup { b0: b0.clone(), ..EpisodeSetup::new(&m, (seed % 3) as usize, seed) };
        let tr = run_episode(&m, &p, &setup).unwrap();
        assert_eq!(accumulate_reward(&tr, Agent::Robot), accumulate_reward(&tr, Agent::Human));
    }
}

#[test]
fn monte_carlo_matches_planned_value() {
    let m = Arc::new(env("assembly", json!({}), 4, Default::default()));
    for y in 0..3 {
        let b = Belief::point(3, y);
        let p = Arc::new(mutual_adaptation(&m, &b, SolveOptions::default()).unwrap());
        let planned = p.value().unwrap();
        let mut pm = (*m).clone().into_parts();
        pm.initial_belief = b.probs().to_vec();
        let mp = Arc::new(coadapt_core::GameModel::new(pm).unwrap());
        let (mean, se) = evaluate_policy_pair(&mp, &p, m.start(), y, 4000, 17).unwrap();
        assert!((mean - planned).abs() <= 3.0 * se + 1e-9, "type {y}: {mean} ± {se} vs {planned}");
    }
}

#[test]
fn population_artifacts() {
    let m = Arc::new(shared_autonomy(6, &[0.0, 1.0]));
    let cfg = PopulationConfig { episodes: 4, ..Default::default() };
    let rep = run_population(&m, &cfg, 5, SolveOptions::default()).unwrap();
    let tmp = std::env::temp_dir().join(format!("coadapt-pop-{}", std::process::id()));
    let dir = run_dir(&tmp, &cfg).unwrap();
    write_population(&dir, &rep, true).unwrap();
    let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert!(csv.starts_with(CSV_HEADER));
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.join("summary.json").exists());
    assert!(dir.join("traces/mutual-adaptation/00003.jsonl").exists());
    std::fs::remove_dir_all(&tmp).unwrap();
}
