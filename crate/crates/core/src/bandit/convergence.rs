//! Learned-parameter extraction and the convergence rule: a parameter has
//! converged to a preferred value when that value is the mode of all
//! selections so far and was selected at least `streak` times in a row.

use serde::{Deserialize, Serialize};

use super::arm::{ArmSpec, Parameter};
use super::policy::BanditState;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterConvergence<T> {
    pub parameter: Parameter,
    /// Mode of the last `window` selections (lowest level on ties).
    pub learned_level: usize,
    pub learned_value: T,
    /// Average selected value over the same window.
    pub window_mean: T,
    /// `|learned_value - window_mean|`; larger means the policy keeps switching.
    pub distance: T,
    pub preferred_level: Option<usize>,
    pub preferred_value: Option<T>,
    pub preferred_is_mode: bool,
    pub longest_preferred_streak: usize,
    pub converged: bool,
    /// First iteration (1-based) at which both conditions held.
    pub convergence_iteration: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub window: usize,
    pub streak: usize,
    pub iterations: usize,
    /// Modal arm over the window.
    pub learned_arm: usize,
    pub parameters: Vec<ParameterConvergence<T>>,
}

impl<T: Real> ConvergenceReport<T> {
    pub fn parameter(&self, p: Parameter) -> &ParameterConvergence<T> {
        &self.parameters[p.slot()]
    }

    pub fn all_converged(&self) -> bool {
        self.parameters.iter().all(|p| p.converged)
    }

    /// Iteration at which the last of the parameters converged.
    pub fn convergence_iteration(&self) -> Option<usize> {
        self.parameters
            .iter()
            .map(|p| p.convergence_iteration)
            .collect::<Option<Vec<_>>>()
            .and_then(|its| its.into_iter().max())
    }
}

/// Per-parameter preferred values (orientation, distance, duration).
pub type Preference<T> = [T; 3];

pub fn convergence_report<T: Real>(
    state: &BanditState<T>,
    window: usize,
    streak: usize,
    preference: Option<Preference<T>>,
) -> Result<ConvergenceReport<T>> {
    let selections: Vec<ArmSpec<T>> = state.history.iter().map(|s| state.arms[s.arm]).collect();
    report_from_selections(&state.arms, &selections, window, streak, preference)
}

/// Same as [`convergence_report`] but over an explicit selection sequence.
pub fn report_from_selections<T: Real>(
    arms: &[ArmSpec<T>],
    selections: &[ArmSpec<T>],
    window: usize,
    streak: usize,
    preference: Option<Preference<T>>,
) -> Result<ConvergenceReport<T>> {
    if window == 0 || window > selections.len() {
        return Err(Error::WindowTooLarge { window, len: selections.len() });
    }
    let tail = &selections[selections.len() - window..];
    let arm_count = arms.iter().map(|a| a.index + 1).max().unwrap_or(0);
    let learned_arm = mode(tail.iter().map(|a| a.index), arm_count);

    let parameters = Parameter::ALL
        .iter()
        .map(|&p| {
            let levels = arms.iter().map(|a| a.level(p) + 1).max().unwrap_or(0);
            let value_of = |level: usize| {
                arms.iter().find(|a| a.level(p) == level).map(|a| a.value(p)).expect("level present in arm set")
            };
            let learned_level = mode(tail.iter().map(|a| a.level(p)), levels);
            let learned_value = value_of(learned_level);
            // Offsets from the learned value, so a constant window gives exactly zero.
            let offset = tail.iter().map(|a| a.value(p) - learned_value).sum::<T>() / T::from_count(window);
            let window_mean = learned_value + offset;

            let preferred_level = preference.map(|pref| nearest_level(arms, p, pref[p.slot()]));
            let (preferred_is_mode, longest, first) = match preferred_level {
                Some(level) => preference_rule(selections.iter().map(|a| a.level(p)), levels, level, streak),
                None => (false, 0, None),
            };
            ParameterConvergence {
                parameter: p,
                learned_level,
                learned_value,
                window_mean,
                distance: offset.abs(),
                preferred_level,
                preferred_value: preferred_level.map(value_of),
                preferred_is_mode,
                longest_preferred_streak: longest,
                converged: preferred_is_mode && longest >= streak,
                convergence_iteration: first,
            }
        })
        .collect();

    Ok(ConvergenceReport { window, streak, iterations: selections.len(), learned_arm, parameters })
}

fn nearest_level<T: Real>(arms: &[ArmSpec<T>], p: Parameter, value: T) -> usize {
    arms.iter()
        .fold((0, T::infinity()), |(best, dist), a| {
            let d = (a.value(p) - value).abs();
            if d < dist || (d == dist && a.level(p) < best) {
                (a.level(p), d)
            } else {
                (best, dist)
            }
        })
        .0
}

/// Most frequent category, lowest on ties.
pub fn mode(items: impl Iterator<Item = usize>, categories: usize) -> usize {
    let mut counts = vec![0usize; categories.max(1)];
    for i in items {
        if i >= counts.len() {
            counts.resize(i + 1, 0);
        }
        counts[i] += 1;
    }
    counts.iter().enumerate().fold((0, 0), |(best, n), (i, &c)| if c > n { (i, c) } else { (best, n) }).0
}

/// Returns (preferred is a mode of the whole sequence, longest run of the
/// preferred value, first iteration at which both rule conditions held).
fn preference_rule(
    levels: impl Iterator<Item = usize>,
    categories: usize,
    preferred: usize,
    streak: usize,
) -> (bool, usize, Option<usize>) {
    let mut counts = vec![0usize; categories.max(preferred + 1)];
    let (mut run, mut longest, mut first) = (0usize, 0usize, None);
    let mut is_mode = false;
    for (i, level) in levels.enumerate() {
        if level >= counts.len() {
            counts.resize(level + 1, 0);
        }
        counts[level] += 1;
        run = if level == preferred { run + 1 } else { 0 };
        longest = longest.max(run);
        is_mode = counts.iter().all(|&c| c <= counts[preferred]);
        if first.is_none() && is_mode && longest >= streak {
            first = Some(i + 1);
        }
    }
    (is_mode, longest, first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{ArmGrid, VarianceMode};

    fn grid_arms() -> Vec<ArmSpec<f64>> {
        ArmGrid::default().arms()
    }

    fn arm_with(levels: [usize; 3]) -> ArmSpec<f64> {
        grid_arms().into_iter().find(|a| a.levels == levels).unwrap()
    }

    #[test]
    fn constant_policy_converges_everywhere() {
        let arms = grid_arms();
        let chosen = arm_with([2, 0, 1]);
        let sel = vec![chosen; 50];
        let pref = [chosen.orientation, chosen.distance, chosen.duration];
        let r = report_from_selections(&arms, &sel, 25, 5, Some(pref)).unwrap();
        assert!(r.all_converged());
        assert_eq!(r.learned_arm, chosen.index);
        for p in &r.parameters {
            assert_eq!(p.distance, 0.0);
            assert_eq!(p.longest_preferred_streak, 50);
            assert_eq!(p.convergence_iteration, Some(5));
        }
    }

    #[test]
    fn alternating_orientation_never_streaks() {
        let arms = grid_arms();
        let a = arm_with([0, 0, 0]);
        let b = arm_with([1, 0, 0]);
        let sel: Vec<_> = (0..50).map(|i| if i % 2 == 0 { a } else { b }).collect();
        let r = report_from_selections(&arms, &sel, 25, 5, Some([a.orientation, a.distance, a.duration])).unwrap();
        let beta = r.parameter(Parameter::Orientation);
        assert_eq!(beta.longest_preferred_streak, 1);
        assert!(!beta.converged);
        assert!(r.parameter(Parameter::Distance).converged);
    }

    #[test]
    fn scripted_majority_with_streak_converges() {
        let arms = grid_arms();
        let pref = arm_with([1, 1, 0]);
        let other = arm_with([0, 1, 0]);
        // 8 in a row first, then 22 more preferred interleaved with 20 others
        let mut sel = vec![pref; 8];
        for i in 0..42 {
            sel.push(if i % 2 == 1 || i >= 40 { pref } else { other });
        }
        let count = sel.iter().filter(|a| a.index == pref.index).count();
        assert_eq!((sel.len(), count), (50, 30));
        let r =
            report_from_selections(&arms, &sel, 25, 5, Some([pref.orientation, pref.distance, pref.duration])).unwrap();
        let beta = r.parameter(Parameter::Orientation);
        assert_eq!(beta.longest_preferred_streak, 8);
        assert!(beta.preferred_is_mode && beta.converged);
        assert_eq!(beta.convergence_iteration, Some(5));
    }

    #[test]
    fn window_mean_and_distance() {
        let arms = grid_arms();
        let a = arm_with([0, 0, 0]);
        let b = arm_with([0, 1, 1]);
        // last 4: a a a b
        let sel = vec![b, b, a, a, a, b];
        let r = report_from_selections(&arms, &sel, 4, 5, None).unwrap();
        let d = r.parameter(Parameter::Distance);
        assert_eq!(d.learned_value, 0.30);
        assert!((d.window_mean - (3.0 * 0.30 + 0.45) / 4.0).abs() < 1e-15);
        assert!((d.distance - 0.0375).abs() < 1e-12);
        assert!(!d.converged && d.preferred_level.is_none());
        assert_eq!(r.learned_arm, a.index);
    }

    #[test]
    fn mode_ties_break_low() {
        assert_eq!(mode([2, 1, 2, 1].into_iter(), 3), 1);
        assert_eq!(mode([0, 2, 2].into_iter(), 3), 2);
    }

    #[test]
    fn window_larger_than_history_fails() {
        let arms = grid_arms();
        let sel = vec![arms[0]; 10];
        assert!(matches!(
            report_from_selections(&arms, &sel, 25, 5, None),
            Err(Error::WindowTooLarge { window: 25, len: 10 })
        ));
        let state = BanditState::new(arms, 0.1, VarianceMode::default()).unwrap();
        assert!(convergence_report(&state, 25, 5, None).is_err());
    }
}
