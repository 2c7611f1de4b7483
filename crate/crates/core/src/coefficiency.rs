//! Weighted aggregation of the cognitive, physical and robot-energy terms
//! into the coefficiency score used as the bandit reward.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ergonomics::{cognitive_cost, physical_cost, AttentionSeries, PostureSeries};
use crate::error::{Error, Result};
use crate::robot::RobotTrajectory;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficiencyWeights<T> {
    pub cognitive: T,
    pub physical: T,
    pub energy: T,
}

impl<T: Real> Default for CoefficiencyWeights<T> {
    fn default() -> Self {
        let third = T::one() / T::lit(3.0);
        Self { cognitive: third, physical: third, energy: third }
    }
}

impl<T: Real> CoefficiencyWeights<T> {
    pub fn new(cognitive: T, physical: T, energy: T) -> Result<Self> {
        let w = Self { cognitive, physical, energy };
        w.validate()?;
        Ok(w)
    }

    /// Averaged questionnaire outcome reported for the handover study cohort.
    pub fn questionnaire_average() -> Self {
        Self { cognitive: T::lit(0.33), physical: T::lit(0.26), energy: T::lit(0.41) }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.cognitive, self.physical, self.energy];
        if all.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
        }
        let sum = self.cognitive + self.physical + self.energy;
        if (sum - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyNormalization<T> {
    /// Largest energy among the candidate trajectories (J).
    pub e_max: T,
}

impl<T: Real> EnergyNormalization<T> {
    pub fn new(e_max: T) -> Result<Self> {
        if !(e_max > T::zero()) || !e_max.is_finite() {
            return Err(Error::InvalidNormalization(e_max.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { e_max })
    }

    /// Normalization from the energies of every candidate trajectory.
    pub fn from_energies(energies: &[T]) -> Result<Self> {
        Self::new(energies.iter().copied().fold(T::zero(), T::max))
    }
}

/// Robot efficiency `1 - E / E_max`, floored at zero.
pub fn robot_energy_cost<T: Real>(energy: T, norm: &EnergyNormalization<T>) -> Result<T> {
    if !(norm.e_max > T::zero()) {
        return Err(Error::InvalidNormalization(norm.e_max.to_f64().unwrap_or(f64::NAN)));
    }
    Ok((T::one() - energy.max(T::zero()) / norm.e_max).clamp_unit())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficiencyBreakdown<T> {
    pub cognitive: T,
    pub physical: T,
    pub energy: T,
    pub weights: CoefficiencyWeights<T>,
    pub total: T,
}

pub fn coefficiency_score<T: Real>(
    cognitive: T,
    physical: T,
    energy: T,
    weights: &CoefficiencyWeights<T>,
) -> Result<CoefficiencyBreakdown<T>> {
    weights.validate()?;
    for (name, v) in [("cognitive", cognitive), ("physical", physical), ("energy", energy)] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::InvalidModel(format!("{name} cost {v} outside [0, 1]")));
        }
    }
    let total = weights.cognitive * cognitive + weights.physical * physical + weights.energy * energy;
    Ok(CoefficiencyBreakdown { cognitive, physical, energy, weights: *weights, total: total.clamp_unit() })
}

/// Everything one handover iteration yields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeObservation<T> {
    /// Normalized reaction time.
    pub reaction: T,
    pub attention: AttentionSeries<T>,
    pub posture: PostureSeries<T>,
    /// Robot energy over the approach (J).
    pub energy: T,
    #[serde(skip)]
    pub trajectory: Option<Arc<RobotTrajectory<T>>>,
}

/// Scores one episode.
pub fn evaluate_episode<T: Real>(
    episode: &EpisodeObservation<T>,
    norm: &EnergyNormalization<T>,
    weights: &CoefficiencyWeights<T>,
) -> Result<CoefficiencyBreakdown<T>> {
    let cognitive = cognitive_cost(episode.reaction, &episode.attention)?;
    let physical = physical_cost(&episode.posture)?;
    let energy = robot_energy_cost(episode.energy, norm)?;
    coefficiency_score(cognitive, physical, energy, weights)
}

/// Bandit reward for one episode.
pub fn reward<T: Real>(
    episode: &EpisodeObservation<T>,
    norm: &EnergyNormalization<T>,
    weights: &CoefficiencyWeights<T>,
) -> Result<T> {
    evaluate_episode(episode, norm, weights).map(|b| b.total)
}
