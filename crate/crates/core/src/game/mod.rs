//! Core types of the two-player game and the Bayes filter over human types.

mod belief;
pub(crate) mod model;
mod trace;

pub use crate::harness::evaluate_policy_pair;
pub use belief::{
    belief_update, belief_update_with, condition_and_predict, predict, Belief, BeliefKey, History, HumanContext,
    ZeroLikelihoodPolicy, BELIEF_QUANTUM, SESSION_SMOOTHING,
};
pub use model::{
    GameModel, HumanType, ModelParts, Outcome, RewardModel, RoleSwap, StateSpace, Teamwork, TypeSpace, WorldState,
    PROB_TOL,
};
pub use trace::{accumulate_reward, Agent, EpisodeTrace, TraceStep};
