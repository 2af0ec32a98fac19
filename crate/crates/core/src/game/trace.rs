use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One logged interaction step. Field order is the wire order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub x: Vec<u32>,
    #[serde(rename = "aR")]
    pub a_r: usize,
    #[serde(rename = "aH")]
    pub a_h: usize,
    /// Robot belief after observing this step.
    pub belief: Vec<f64>,
    #[serde(rename = "rR")]
    pub r_r: f64,
    #[serde(rename = "rH")]
    pub r_h: f64,
    /// True type at this step, `-1` when unknown.
    pub y: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub condition: String,
    pub initial_belief: Vec<f64>,
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Robot,
    Human,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Writes one step per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.steps {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_steps<R: BufRead>(r: R) -> Result<Vec<TraceStep>> {
        let mut out = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line)?);
        }
        Ok(out)
    }
}

pub fn accumulate_reward(trace: &EpisodeTrace, agent: Agent) -> f64 {
    trace
        .steps
        .iter()
        .map(|s| match agent {
            Agent::Robot => s.r_r,
            Agent::Human => s.r_h,
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(t: usize, r: f64) -> TraceStep {
        TraceStep { t, x: vec![0], a_r: 0, a_h: 0, belief: vec![1.0], r_r: r, r_h: -r, y: 0 }
    }

    #[test]
    fn empty_trace_sums_to_zero() {
        assert_eq!(accumulate_reward(&EpisodeTrace::default(), Agent::Robot), 0.0);
    }

    #[test]
    fn constant_rewards_sum() {
        let tr = EpisodeTrace { steps: (0..3).map(|t| step(t, 1.0)).collect(), ..Default::default() };
        assert_eq!(accumulate_reward(&tr, Agent::Robot), 3.0);
        assert_eq!(accumulate_reward(&tr, Agent::Human), -3.0);
    }

    #[test]
    fn jsonl_field_order() {
        let tr = EpisodeTrace { steps: vec![step(0, 1.5)], ..Default::default() };
        assert_eq!(
            tr.to_jsonl(),
            "{\"t\":0,\"x\":[0],\"aR\":0,\"aH\":0,\"belief\":[1.0],\"rR\":1.5,\"rH\":-1.5,\"y\":0}\n"
        );
        let back = EpisodeTrace::read_steps(tr.to_jsonl().as_bytes()).unwrap();
        assert_eq!(back, tr.steps);
    }
}
