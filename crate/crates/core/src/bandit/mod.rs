//! Finite-armed UCB1-tuned bandit over the handover parameter grid, with
//! convergence detection and regret bookkeeping.

mod arm;
mod convergence;
mod policy;
mod regret;
mod stats;

pub use arm::{ArmGrid, ArmSpec, Parameter};
pub use convergence::{
    convergence_report, mode, report_from_selections, ConvergenceReport, ParameterConvergence, Preference,
};
pub use policy::{argmax, BanditState, Selection};
pub use regret::cumulative_regret;
pub use stats::{confidence_width, ucb_value, variance_bound, ArmStats, VarianceMode};
