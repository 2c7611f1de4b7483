//! Handover coefficiency: a score combining the human's cognitive and
//! physical load with the robot's energy expenditure, a UCB1-tuned learner
//! that adapts handover parameters to it, and a synthetic subject simulator
//! for closed-loop experiments.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the simulator
//! and experiment driver run in `f64`. The aliases below fix the scalar to
//! `f64` for the common case.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod body;
pub mod coefficiency;
pub mod config;
pub mod ergonomics;
pub mod error;
pub mod geometry;
pub mod robot;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Arm = bandit::ArmSpec<f64>;
pub type Grid = bandit::ArmGrid<f64>;
pub type Bandit = bandit::BanditState<f64>;
pub type Report = bandit::ConvergenceReport<f64>;
pub type BodyModel = body::HumanBodyModel<f64>;
pub type Robot = robot::RobotModel<f64>;
pub type Scene = robot::SceneConfig<f64>;
pub type Trajectory = robot::RobotTrajectory<f64>;
pub type Weights = coefficiency::CoefficiencyWeights<f64>;
pub type Breakdown = coefficiency::CoefficiencyBreakdown<f64>;
pub type Observation = coefficiency::EpisodeObservation<f64>;
