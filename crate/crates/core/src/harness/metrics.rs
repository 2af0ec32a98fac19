use serde::{Deserialize, Serialize};

use crate::game::{EpisodeTrace, GameModel, Outcome, WorldState};

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len();
        if n == 0 {
            return Stat::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Stat { mean, stderr: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Stat { mean, stderr: (var / n as f64).sqrt() }
    }

    /// `[mean − kσ, mean + kσ]` does not intersect the other's interval.
    pub fn separated_from(&self, other: &Stat, k: f64) -> bool {
        self.mean - k * self.stderr > other.mean + k * other.stderr
            || other.mean - k * other.stderr > self.mean + k * self.stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub steps: usize,
    pub robot_reward: f64,
    pub human_reward: f64,
    pub disagreements: usize,
    pub outcome: Outcome,
}

impl MetricRecord {
    pub fn robot_goal(&self) -> bool {
        self.outcome == Outcome::RobotGoal
    }

    pub fn human_goal(&self) -> bool {
        self.outcome == Outcome::HumanGoal
    }
}

/// Final state of a trace, or `None` when it is empty.
pub fn final_state(trace: &EpisodeTrace, model: &GameModel) -> Option<usize> {
    let last = trace.steps.last()?;
    let x = model.space().index_of(&WorldState(last.x.clone()))?;
    Some(model.next_state(x, last.a_r, last.a_h))
}

pub fn compute_metrics(trace: &EpisodeTrace, model: &GameModel) -> MetricRecord {
    let disagreements = trace
        .steps
        .iter()
        .filter(|s| model.space().index_of(&WorldState(s.x.clone())).is_some_and(|x| model.disagree(x, s.a_r, s.a_h)))
        .count();
    let outcome = match final_state(trace, model) {
        None => Outcome::Ongoing,
        Some(s) => match model.outcome(s) {
            Outcome::Ongoing if trace.steps.len() >= model.horizon() => Outcome::Timeout,
            o => o,
        },
    };
    MetricRecord {
        steps: trace.steps.len(),
        robot_reward: trace.steps.iter().map(|s| s.r_r).sum(),
        human_reward: trace.steps.iter().map(|s| s.r_h).sum(),
        disagreements,
        outcome,
    }
}

/// Aggregates for one experimental condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub episodes: usize,
    pub robot_reward: Stat,
    pub human_reward: Stat,
    pub steps: Stat,
    pub disagreements: Stat,
    pub robot_goal_rate: Stat,
    pub human_goal_rate: Stat,
}

pub fn summarize(condition: &str, records: &[MetricRecord]) -> ConditionSummary {
    let col = |f: &dyn Fn(&MetricRecord) -> f64| Stat::of(&records.iter().map(f).collect::<Vec<_>>());
    ConditionSummary {
        condition: condition.to_string(),
        episodes: records.len(),
        robot_reward: col(&|r| r.robot_reward),
        human_reward: col(&|r| r.human_reward),
        steps: col(&|r| r.steps as f64),
        disagreements: col(&|r| r.disagreements as f64),
        robot_goal_rate: col(&|r| r.robot_goal() as u8 as f64),
        human_goal_rate: col(&|r| r.human_goal() as u8 as f64),
    }
}

pub const CSV_HEADER: &str = "condition,episodes,robot_reward_mean,robot_reward_stderr,human_reward_mean,human_reward_stderr,steps_mean,steps_stderr,disagreements_mean,disagreements_stderr,robot_goal_rate,robot_goal_rate_stderr,human_goal_rate,human_goal_rate_stderr";

pub fn to_csv(rows: &[ConditionSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let stats = [r.robot_reward, r.human_reward, r.steps, r.disagreements, r.robot_goal_rate, r.human_goal_rate];
        let cells: Vec<String> = stats.iter().flat_map(|s| [s.mean.to_string(), s.stderr.to_string()]).collect();
        out.push_str(&format!("{},{},{}\n", r.condition, r.episodes, cells.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_of_constant_has_zero_stderr() {
        let s = Stat::of(&[2.0, 2.0, 2.0]);
        assert_eq!(s, Stat { mean: 2.0, stderr: 0.0 });
        assert_eq!(Stat::of(&[]), Stat::default());
    }

    #[test]
    fn stderr_formula() {
        let s = Stat::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.stderr - 1.0).abs() < 1e-12);
    }
}
