//! Synthetic handover environment and experiment driver.

mod episode;
mod experiment;
mod profile;

pub use episode::{EpisodeOutcome, EpisodeTrace, SimulationSettings, Simulator};
pub use experiment::{run_experiment, BanditSettings, ExperimentOutcome, RunLog, RunMeta, StepRecord};
pub use profile::{body_from_ranges, HumanProfile, HumanReach, Response, PRESETS};
