use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameModel, WorldState};
use crate::harness::episode_seed;
use crate::human::SimulatedHuman;
use crate::planner::no_adaptation_table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Forward,
    Rotation,
}

/// Trace step without the belief.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoStep {
    pub t: usize,
    pub x: Vec<u32>,
    #[serde(rename = "aR")]
    pub a_r: usize,
    #[serde(rename = "aH")]
    pub a_h: usize,
    #[serde(rename = "rR")]
    pub r_r: f64,
    #[serde(rename = "rH")]
    pub r_h: f64,
    pub y: i64,
}

/// One training episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub phase: Phase,
    pub steps: Vec<DemoStep>,
}

impl Demonstration {
    /// `(x, aR, aH)` with states as indices into the model's space.
    pub fn indexed(&self, model: &GameModel) -> Result<Vec<(usize, usize, usize)>> {
        self.steps
            .iter()
            .map(|s| {
                let x = model
                    .space()
                    .index_of(&WorldState(s.x.clone()))
                    .ok_or_else(|| Error::model(format!("demonstration state {:?} is outside the model", s.x)))?;
                if s.a_r >= model.n_robot() || s.a_h >= model.n_human() {
                    return Err(Error::model("demonstration action out of range"));
                }
                Ok((x, s.a_r, s.a_h))
            })
            .collect()
    }
}

/// One demonstration per line.
pub fn write_demonstrations<W: Write>(demos: &[Demonstration], mut w: W) -> Result<()> {
    for d in demos {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_demonstrations<R: BufRead>(r: R) -> Result<Vec<Demonstration>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            let d: Demonstration = serde_json::from_str(&line)?;
            if d.steps.is_empty() {
                return Err(Error::model("empty demonstration"));
            }
            out.push(d);
        }
    }
    Ok(out)
}

/// Forward-phase episodes of simulated humans of the given types, with the
/// robot following the no-adaptation table. Demonstration `i` uses
/// `episode_seed(seed, i)`.
pub fn generate_demonstrations(model: &GameModel, types: &[usize], seed: u64) -> Vec<Demonstration> {
    let table = no_adaptation_table(model);
    types
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(seed, i as u64));
            let mut human = SimulatedHuman::new(model, y);
            let mut x = model.start();
            let mut steps = Vec::new();
            let horizon = model.horizon();
            for t in 0..horizon {
                if model.is_terminal(x) {
                    break;
                }
                let a_r = table[horizon - t][x];
                let y_now = human.y;
                let a_h = human.act(model, x, a_r, &mut rng);
                steps.push(DemoStep {
                    t,
                    x: model.world_state(x).0,
                    a_r,
                    a_h,
                    r_r: model.robot_reward(x, a_r, a_h, y_now),
                    r_h: model.human_reward(x, a_r, a_h, y_now),
                    y: y_now as i64,
                });
                human.transition(model, a_r, &mut rng);
                x = model.next_state(x, a_r, a_h);
            }
            Demonstration { phase: Phase::Forward, steps }
        })
        .collect()
}
