use serde::{Deserialize, Serialize};

use super::arm::ArmSpec;
use super::stats::{ucb_value, ArmStats, VarianceMode};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One executed iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection<T> {
    /// 1-based iteration number.
    pub t: usize,
    pub arm: usize,
    pub reward: T,
}

/// Finite-armed UCB1-tuned learner.
///
/// Unpulled arms score `+inf`, so the first `K` steps pull every arm once in
/// index order before the exploration constant takes effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState<T> {
    pub arms: Vec<ArmSpec<T>>,
    pub stats: Vec<ArmStats<T>>,
    /// Total pulls so far.
    pub step: usize,
    pub exploration: T,
    pub variance_mode: VarianceMode,
    pub history: Vec<Selection<T>>,
}

impl<T: Real> BanditState<T> {
    pub fn new(arms: Vec<ArmSpec<T>>, exploration: T, variance_mode: VarianceMode) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidArm("bandit needs at least one arm".into()));
        }
        if !(exploration >= T::zero()) {
            return Err(Error::ConfigInvalid(format!("exploration constant {exploration} must be nonnegative")));
        }
        let stats = vec![ArmStats::default(); arms.len()];
        Ok(Self { arms, stats, step: 0, exploration, variance_mode, history: Vec::new() })
    }

    /// Keeps every reward per arm (used by oracle replays).
    pub fn retain_history(mut self) -> Self {
        for s in &mut self.stats {
            s.reward_history.get_or_insert_with(Vec::new);
        }
        self
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn q_values(&self) -> Vec<T> {
        self.stats.iter().map(|s| ucb_value(s, self.step, self.exploration)).collect()
    }

    pub fn means(&self) -> Vec<T> {
        self.stats.iter().map(|s| s.mean).collect()
    }

    pub fn pulls(&self) -> Vec<usize> {
        self.stats.iter().map(|s| s.pulls).collect()
    }

    /// Arm maximizing the UCB index, lowest index on ties.
    pub fn select_action(&self) -> &ArmSpec<T> {
        &self.arms[argmax(&self.q_values())]
    }

    /// Records `reward` for `arm`.
    pub fn record(&mut self, arm: usize, reward: T) -> Result<()> {
        let stats = self.stats.get_mut(arm).ok_or_else(|| Error::InvalidArm(format!("no arm with index {arm}")))?;
        stats.update(reward, self.variance_mode)?;
        self.step += 1;
        self.history.push(Selection { t: self.step, arm, reward });
        Ok(())
    }

    /// Selects an arm, runs it, and records the reward.
    pub fn step<F>(&mut self, mut runner: F) -> Result<(ArmSpec<T>, T)>
    where
        F: FnMut(&ArmSpec<T>) -> Result<T>,
    {
        let arm = *self.select_action();
        let reward = runner(&arm)?;
        self.record(arm.index, reward)?;
        Ok((arm, reward))
    }

    pub fn selected_arms(&self) -> Vec<usize> {
        self.history.iter().map(|s| s.arm).collect()
    }
}

/// Index of the first maximal value.
pub fn argmax<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::ArmGrid;

    fn state(c: f64) -> BanditState<f64> {
        BanditState::new(ArmGrid::default().arms(), c, VarianceMode::SquaredRewards).unwrap()
    }

    #[test]
    fn priming_pulls_lowest_unpulled_first() {
        let mut s = state(0.1);
        assert_eq!(s.select_action().index, 0);
        s.record(0, 0.9).unwrap();
        s.record(2, 0.1).unwrap();
        assert_eq!(s.select_action().index, 1);
    }

    #[test]
    fn twelve_steps_pull_every_arm_once() {
        let mut s = state(0.1);
        for _ in 0..12 {
            s.step(|a| Ok(0.05 * a.index as f64)).unwrap();
        }
        assert!(s.pulls().iter().all(|&n| n == 1));
        assert_eq!(s.selected_arms(), (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn dominant_mean_wins() {
        let arms = ArmGrid::default().arms()[..2].to_vec();
        let mut s = BanditState::new(arms, 0.1, VarianceMode::SquaredRewards).unwrap();
        for _ in 0..3 {
            s.record(0, 0.9).unwrap();
            s.record(1, 0.1).unwrap();
        }
        assert_eq!(s.select_action().index, 0);
    }

    #[test]
    fn pulls_are_conserved() {
        let mut s = state(0.1);
        for k in 0..50 {
            s.step(|a| Ok(((a.index * 7 + k) % 10) as f64 / 10.0)).unwrap();
        }
        assert_eq!(s.pulls().iter().sum::<usize>(), 50);
        assert_eq!(s.history.len(), 50);
        assert_eq!(s.step, 50);
        assert_eq!(s.history.last().unwrap().t, 50);
    }

    #[test]
    fn deterministic_runner_gives_identical_runs() {
        let run = || {
            let mut s = state(0.1);
            for _ in 0..40 {
                s.step(|a| Ok(0.5 + 0.03 * (a.index as f64 - 6.0).abs().sin())).unwrap();
            }
            s
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn zero_exploration_is_greedy() {
        let mut s = state(0.0);
        for i in 0..12 {
            s.record(i, if i == 5 { 0.8 } else { 0.4 }).unwrap();
        }
        assert_eq!(s.q_values()[5], 0.8);
        assert_eq!(s.select_action().index, 5);
    }

    #[test]
    fn runner_errors_propagate_without_recording() {
        let mut s = state(0.1);
        assert!(s.step(|_| Ok(1.5)).is_err());
        assert_eq!(s.step, 0);
        assert!(s.step(|_| Err(Error::EmptySeries("x"))).is_err());
        assert!(BanditState::<f64>::new(vec![], 0.1, VarianceMode::SquaredRewards).is_err());
    }
}
