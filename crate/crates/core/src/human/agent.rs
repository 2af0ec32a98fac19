use rand::Rng;

use super::{bam_step, sample_index, type_transition_step, HumanModel};
use crate::game::{GameModel, HumanContext};

/// A simulated person: true (hidden) type plus their own interaction state.
#[derive(Clone, Debug)]
pub struct SimulatedHuman {
    pub y: usize,
    pub state: HumanContext,
}

impl SimulatedHuman {
    pub fn new(model: &GameModel, y: usize) -> Self {
        SimulatedHuman { y, state: model.human_model().initial_context() }
    }

    /// Chooses an action in response to the robot's action at `x` and
    /// advances the human's own memory.
    pub fn act<R: Rng + ?Sized>(&mut self, model: &GameModel, x: usize, a_r: usize, rng: &mut R) -> usize {
        match model.human_model() {
            HumanModel::Bam(b) => {
                let alpha = model.types().get(self.y).adaptability;
                let (a_h, next) = bam_step(b, &self.state, x, a_r, alpha, rng);
                self.state = next;
                a_h
            }
            HumanModel::BestResponse => super::best_response(model, x, a_r, model.types().get(self.y).reward_param),
            HumanModel::Fixed(f) => {
                let row = f.row(self.y, x);
                if row.contains(&1.0) {
                    row.iter().position(|p| *p == 1.0).unwrap()
                } else {
                    sample_index(row, rng)
                }
            }
        }
    }

    /// Applies the type kernel after the robot's action.
    pub fn transition<R: Rng + ?Sized>(&mut self, model: &GameModel, a_r: usize, rng: &mut R) {
        self.y = type_transition_step(self.y, a_r, model.types(), rng);
    }
}
