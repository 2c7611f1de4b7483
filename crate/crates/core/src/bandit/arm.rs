use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Interaction parameter adapted by the bandit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Orientation,
    Distance,
    Duration,
}

impl Parameter {
    pub const ALL: [Parameter; 3] = [Parameter::Orientation, Parameter::Distance, Parameter::Duration];

    pub fn slot(self) -> usize {
        match self {
            Parameter::Orientation => 0,
            Parameter::Distance => 1,
            Parameter::Duration => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Orientation => "orientation",
            Parameter::Distance => "distance",
            Parameter::Duration => "duration",
        }
    }
}

/// One bandit action: handle yaw, handover distance and approach duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec<T> {
    pub index: usize,
    /// Object handle yaw relative to the human (rad).
    pub orientation: T,
    /// Object distance from the human chest reference (m).
    pub distance: T,
    /// Approach trajectory duration (s).
    pub duration: T,
    /// Position of each parameter within its grid axis.
    pub levels: [usize; 3],
}

impl<T: Real> ArmSpec<T> {
    pub fn value(&self, p: Parameter) -> T {
        match p {
            Parameter::Orientation => self.orientation,
            Parameter::Distance => self.distance,
            Parameter::Duration => self.duration,
        }
    }

    pub fn level(&self, p: Parameter) -> usize {
        self.levels[p.slot()]
    }
}

/// Cartesian product of candidate parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmGrid<T> {
    pub orientations: Vec<T>,
    pub distances: Vec<T>,
    pub durations: Vec<T>,
}

impl<T: Real> Default for ArmGrid<T> {
    fn default() -> Self {
        let pi = T::PI();
        Self {
            orientations: vec![pi / T::lit(6.0), pi / T::lit(2.0), T::lit(5.0) * pi / T::lit(6.0)],
            distances: vec![T::lit(0.30), T::lit(0.45)],
            durations: vec![T::lit(5.0), T::lit(8.0)],
        }
    }
}

impl<T: Real> ArmGrid<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in
            [("orientations", &self.orientations), ("distances", &self.distances), ("durations", &self.durations)]
        {
            if axis.is_empty() {
                return Err(Error::ConfigInvalid(format!("grid.{name} must not be empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::ConfigInvalid(format!("grid.{name} has non-finite values")));
            }
        }
        if self.distances.iter().any(|d| *d <= T::zero()) {
            return Err(Error::ConfigInvalid("grid.distances must be positive".into()));
        }
        if self.durations.iter().any(|d| *d <= T::zero()) {
            return Err(Error::ConfigInvalid("grid.durations must be positive".into()));
        }
        Ok(())
    }

    pub fn axis(&self, p: Parameter) -> &[T] {
        match p {
            Parameter::Orientation => &self.orientations,
            Parameter::Distance => &self.distances,
            Parameter::Duration => &self.durations,
        }
    }

    pub fn len(&self) -> usize {
        self.orientations.len() * self.distances.len() * self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All arms, orientation-major then distance then duration.
    pub fn arms(&self) -> Vec<ArmSpec<T>> {
        let mut out = Vec::with_capacity(self.len());
        for (i, &orientation) in self.orientations.iter().enumerate() {
            for (j, &distance) in self.distances.iter().enumerate() {
                for (k, &duration) in self.durations.iter().enumerate() {
                    out.push(ArmSpec { index: out.len(), orientation, distance, duration, levels: [i, j, k] });
                }
            }
        }
        out
    }

    pub fn arm(&self, index: usize) -> Result<ArmSpec<T>> {
        self.arms()
            .get(index)
            .copied()
            .ok_or_else(|| Error::InvalidArm(format!("index {index} outside grid of {}", self.len())))
    }

    /// Index of the grid value closest to `value` along one axis.
    pub fn nearest_level(&self, p: Parameter, value: T) -> usize {
        self.axis(p)
            .iter()
            .enumerate()
            .fold((0, T::infinity()), |(best, dist), (i, v)| {
                let d = (*v - value).abs();
                if d < dist {
                    (i, d)
                } else {
                    (best, dist)
                }
            })
            .0
    }

    /// Arm whose parameters are nearest to the given values.
    pub fn nearest_arm(&self, orientation: T, distance: T, duration: T) -> ArmSpec<T> {
        let levels = [
            self.nearest_level(Parameter::Orientation, orientation),
            self.nearest_level(Parameter::Distance, distance),
            self.nearest_level(Parameter::Duration, duration),
        ];
        self.arms().into_iter().find(|a| a.levels == levels).expect("levels within grid")
    }

    /// Checks that an arm was produced by this grid.
    pub fn contains(&self, arm: &ArmSpec<T>) -> bool {
        self.arms().get(arm.index).is_some_and(|a| a == arm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_grid_has_twelve_arms() {
        let grid = ArmGrid::<f64>::default();
        let arms = grid.arms();
        assert_eq!(arms.len(), 12);
        assert!(arms.iter().enumerate().all(|(i, a)| a.index == i));
        assert_eq!(arms[0].orientation, PI / 6.0);
        assert_eq!(arms[11].orientation, 5.0 * PI / 6.0);
        assert_eq!((arms[11].distance, arms[11].duration), (0.45, 8.0));
        assert_eq!(arms[7].levels, [1, 1, 1]);
    }

    #[test]
    fn nearest_arm_snaps_to_grid() {
        let grid = ArmGrid::<f64>::default();
        let arm = grid.nearest_arm(1.5, 0.44, 7.0);
        assert_eq!(arm.levels, [1, 1, 1]);
        assert!(grid.contains(&arm));
        assert!(grid.arm(12).is_err());
    }

    #[test]
    fn empty_axis_is_rejected() {
        let grid = ArmGrid::<f64> { distances: vec![], ..ArmGrid::default() };
        let err = grid.validate().unwrap_err().to_string();
        assert!(err.contains("distances"));
    }
}
