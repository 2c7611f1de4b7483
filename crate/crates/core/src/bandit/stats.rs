use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Statistic accumulated for the variance bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMode {
    /// Squared rewards, as in standard UCB1-tuned.
    #[default]
    SquaredRewards,
    /// Squared running means after every pull.
    RunningMeans,
}

/// Per-arm running statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats<T> {
    pub pulls: usize,
    pub mean: T,
    /// Running sum of the squared statistic selected by [`VarianceMode`].
    pub sum_sq: T,
    /// Every reward received, when history retention is enabled.
    pub reward_history: Option<Vec<T>>,
}

impl<T: Real> Default for ArmStats<T> {
    fn default() -> Self {
        Self { pulls: 0, mean: T::zero(), sum_sq: T::zero(), reward_history: None }
    }
}

impl<T: Real> ArmStats<T> {
    pub fn with_history() -> Self {
        Self { reward_history: Some(Vec::new()), ..Self::default() }
    }

    /// Incremental mean update; the divisor is the count including this pull.
    pub fn update(&mut self, reward: T, mode: VarianceMode) -> Result<()> {
        if !(reward >= T::zero() && reward <= T::one()) {
            return Err(Error::RewardOutOfRange(reward.to_f64().unwrap_or(f64::NAN)));
        }
        self.pulls += 1;
        self.mean = self.mean + (reward - self.mean) / T::from_count(self.pulls);
        self.sum_sq = self.sum_sq
            + match mode {
                VarianceMode::SquaredRewards => reward * reward,
                VarianceMode::RunningMeans => self.mean * self.mean,
            };
        if let Some(history) = &mut self.reward_history {
            history.push(reward);
        }
        Ok(())
    }

    /// Empirical second moment minus squared mean, floored at zero.
    pub fn sample_variance(&self) -> T {
        if self.pulls == 0 {
            return T::zero();
        }
        (self.sum_sq / T::from_count(self.pulls) - self.mean * self.mean).max(T::zero())
    }
}

/// Upper confidence bound on the reward variance of an arm after `t` total plays.
pub fn variance_bound<T: Real>(stats: &ArmStats<T>, arm: usize, t: usize) -> Result<T> {
    if stats.pulls == 0 {
        return Err(Error::UnpulledArm(arm));
    }
    let n = T::from_count(stats.pulls);
    let ln_t = T::from_count(t.max(1)).ln();
    Ok(stats.sample_variance() + (T::lit(2.0) * ln_t / n).sqrt())
}

/// UCB1-tuned index; `+inf` for arms never pulled.
pub fn ucb_value<T: Real>(stats: &ArmStats<T>, t: usize, c: T) -> T {
    if stats.pulls == 0 {
        return T::infinity();
    }
    stats.mean + c * confidence_width(stats, t)
}

/// `sqrt(ln t / N * min(1/4, V))`, the term scaled by the exploration constant.
pub fn confidence_width<T: Real>(stats: &ArmStats<T>, t: usize) -> T {
    let n = T::from_count(stats.pulls);
    let ln_t = T::from_count(t.max(1)).ln();
    let v = variance_bound(stats, 0, t).unwrap_or_else(|_| T::infinity());
    (ln_t / n * v.min(T::lit(0.25))).sqrt()
}
