//! Planning and simulation for human-robot mutual adaptation.
//!
//! The crate models collaboration as a finite-horizon two-player game in
//! which the human's type is hidden from the robot. It ships exact
//! belief-space planners, simulated human models, four task environments,
//! learning routines for robot adaptation, and a seeded experiment harness.

pub mod config;
pub mod envs;
pub mod error;
pub mod game;
pub mod harness;
pub mod human;
pub mod learning;
pub mod planner;
pub mod session;

pub use error::{Error, Result};
pub use game::{Belief, EpisodeTrace, GameModel, History, HumanContext, HumanType, TraceStep, TypeSpace, WorldState};
pub use planner::RobotPolicy;
