//! Human-side signals: reaction time, attention level, per-DoF posture
//! comfort, and the two human cost terms built from them.
//!
//! Every score is normalized to `[0, 1]` with 1 meaning most comfortable.

use serde::{Deserialize, Serialize};

use crate::body::{DoFRange, HumanBodyModel, SphericalOffset};
use crate::error::{Error, Result};
use crate::scalar::{mean, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionObservation<T> {
    /// Robot motion start (s).
    pub robot_start: T,
    /// Human motion initiation (s).
    pub human_start: T,
    /// Robot trajectory duration (s).
    pub robot_duration: T,
}

/// Latency between robot and human motion onset as a fraction of the robot
/// trajectory duration, clamped to `[0, 1]`.
pub fn reaction_time<T: Real>(obs: &ReactionObservation<T>) -> Result<T> {
    if !(obs.robot_duration > T::zero()) {
        return Err(Error::InvalidDuration(obs.robot_duration.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(((obs.human_start - obs.robot_start) / obs.robot_duration).clamp_unit())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams<T> {
    /// Radius of the region containing the object (m).
    pub object_radius: T,
    /// Width of the raised-cosine transition band, relative to the radius.
    pub smoothing: T,
}

impl<T: Real> Default for AttentionParams<T> {
    fn default() -> Self {
        Self { object_radius: T::lit(0.10), smoothing: T::lit(0.4) }
    }
}

impl<T: Real> AttentionParams<T> {
    pub fn new(object_radius: T, smoothing: T) -> Result<Self> {
        if !(object_radius > T::zero()) || !(smoothing > T::zero() && smoothing < T::one()) {
            return Err(Error::InvalidModel(format!(
                "attention params need r > 0 and 0 < gamma < 1, got r = {object_radius}, gamma = {smoothing}"
            )));
        }
        Ok(Self { object_radius, smoothing })
    }
}

/// Angular limits of the full-attention cone and of the transition band for
/// an object at distance `d`.
pub fn attention_limits<T: Real>(d: T, params: &AttentionParams<T>) -> Result<(T, T)> {
    if !(d > T::zero()) {
        return Err(Error::DegenerateGeometry(format!("attention distance {d} must be positive")));
    }
    let r = params.object_radius;
    let g = params.smoothing;
    let lo = ((T::one() - g) * r / d).atan();
    let hi = ((T::one() + g) * r / d).atan();
    Ok((lo, hi))
}

/// Raised-cosine membership: 1 inside `alpha_min`, rolling off to 0 at `alpha_max`.
pub fn attention_membership<T: Real>(alpha: T, alpha_min: T, alpha_max: T) -> Result<T> {
    if !(alpha_min < alpha_max) {
        return Err(Error::InvalidBand {
            min: alpha_min.to_f64().unwrap_or(f64::NAN),
            max: alpha_max.to_f64().unwrap_or(f64::NAN),
        });
    }
    let a = alpha.abs();
    Ok(if a <= alpha_min {
        T::one()
    } else if a <= alpha_max {
        let x = (a - alpha_min) / (alpha_max - alpha_min) * T::PI();
        // 1 at the cone edge, 0 at the band edge
        (T::one() + x.cos()) / T::lit(2.0)
    } else {
        T::zero()
    })
}

/// Product of azimuth and elevation memberships.
pub fn attention_level<T: Real>(offset: &SphericalOffset<T>, params: &AttentionParams<T>) -> Result<T> {
    let (lo, hi) = attention_limits(offset.radial, params)?;
    let level = attention_membership(offset.azimuth, lo, hi)? * attention_membership(offset.elevation, lo, hi)?;
    Ok(level.clamp_unit())
}

/// Comfort of one DoF: 1 at mid-range, 0 at either extremum.
pub fn dof_cost<T: Real>(q: T, range: &DoFRange<T>) -> T {
    let q = range.clamp(q);
    let nearest = (q - range.q_min).abs().min((q - range.q_max).abs());
    (T::lit(2.0) * nearest / range.span().abs()).clamp_unit()
}

/// Mean over joints of each joint's most stressed DoF.
pub fn posture_score<T: Real>(model: &HumanBodyModel<T>) -> T {
    let per_joint: Vec<T> = model
        .joints
        .iter()
        .map(|joint| joint.angles.iter().zip(&joint.ranges).map(|(&q, r)| dof_cost(q, r)).fold(T::one(), T::min))
        .collect();
    mean(&per_joint).unwrap_or_else(T::zero).clamp_unit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionSeries<T> {
    pub timestamps: Vec<T>,
    pub levels: Vec<T>,
}

impl<T: Real> AttentionSeries<T> {
    pub fn new(timestamps: Vec<T>, levels: Vec<T>) -> Result<Self> {
        if timestamps.len() != levels.len() {
            return Err(Error::InvalidModel("attention series length mismatch".into()));
        }
        if levels.iter().any(|l| !(*l >= T::zero() && *l <= T::one())) {
            return Err(Error::InvalidModel("attention level outside [0, 1]".into()));
        }
        Ok(Self { timestamps, levels })
    }

    /// Uniform-in-samples mean attention.
    pub fn mean(&self) -> Option<T> {
        mean(&self.levels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostureSeries<T> {
    pub timestamps: Vec<T>,
    pub scores: Vec<T>,
}

impl<T: Real> PostureSeries<T> {
    pub fn new(timestamps: Vec<T>, scores: Vec<T>) -> Result<Self> {
        if timestamps.len() != scores.len() {
            return Err(Error::InvalidModel("posture series length mismatch".into()));
        }
        if scores.iter().any(|s| !(*s >= T::zero() && *s <= T::one())) {
            return Err(Error::InvalidModel("posture score outside [0, 1]".into()));
        }
        Ok(Self { timestamps, scores })
    }
}

/// Cognitive comfort: synchrony with the robot and mean attention, equally weighted.
pub fn cognitive_cost<T: Real>(reaction: T, attention: &AttentionSeries<T>) -> Result<T> {
    let focus = attention.mean().ok_or(Error::EmptySeries("attention"))?;
    let reaction = reaction.clamp_unit();
    Ok(((T::one() - reaction + focus) / T::lit(2.0)).clamp_unit())
}

/// Physical comfort: the worst posture score over the episode.
pub fn physical_cost<T: Real>(posture: &PostureSeries<T>) -> Result<T> {
    posture.scores.iter().copied().reduce(T::min).map(Real::clamp_unit).ok_or(Error::EmptySeries("posture"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::HumanJoint;
    use crate::geometry::Pose;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn obs(dt_start: f64, duration: f64) -> ReactionObservation<f64> {
        ReactionObservation { robot_start: 1.0, human_start: 1.0 + dt_start, robot_duration: duration }
    }

    #[test]
    fn reaction_time_examples() {
        assert_eq!(reaction_time(&obs(0.0, 5.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(reaction_time(&obs(2.5, 5.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(reaction_time(&obs(9.0, 5.0)).unwrap(), 1.0);
        assert_eq!(reaction_time(&obs(-0.5, 5.0)).unwrap(), 0.0);
        assert!(matches!(reaction_time(&obs(1.0, 0.0)), Err(Error::InvalidDuration(_))));
    }

    #[test]
    fn attention_limits_examples() {
        let p = AttentionParams::new(0.1, 0.4).unwrap();
        let (lo, hi) = attention_limits(0.5, &p).unwrap();
        assert_abs_diff_eq!(lo, 0.12f64.atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(lo, 0.11943, epsilon = 1e-5);
        assert_abs_diff_eq!(hi, 0.27300, epsilon = 1e-5);

        let (lo2, hi2) = attention_limits(1.0, &p).unwrap();
        assert!(lo2 < lo && hi2 < hi);

        let narrow = AttentionParams { object_radius: 0.1, smoothing: 0.0 };
        let (a, b) = attention_limits(0.5, &narrow).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a, 0.2f64.atan(), epsilon = 1e-15);

        assert!(attention_limits(0.0, &p).is_err());
        assert!(AttentionParams::new(0.1, 1.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let (lo, hi) = (0.11943, 0.27300);
        assert_eq!(attention_membership(0.0, lo, hi).unwrap(), 1.0);
        assert_abs_diff_eq!(attention_membership((lo + hi) / 2.0, lo, hi).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(attention_membership(hi + 0.001, lo, hi).unwrap(), 0.0);
        assert_eq!(attention_membership(lo, lo, hi).unwrap(), 1.0);
        assert_abs_diff_eq!(attention_membership(hi, lo, hi).unwrap(), 0.0, epsilon = 1e-15);
        assert!(matches!(attention_membership(0.1, 0.2, 0.2), Err(Error::InvalidBand { .. })));
    }

    #[test]
    fn attention_level_examples() {
        let p = AttentionParams::default();
        let direct = SphericalOffset { azimuth: 0.0, elevation: 0.0, radial: 0.7 };
        assert_eq!(attention_level(&direct, &p).unwrap(), 1.0);

        let (lo, hi) = attention_limits(0.5, &p).unwrap();
        let away = SphericalOffset { azimuth: hi + 0.01, elevation: 0.0, radial: 0.5 };
        assert_eq!(attention_level(&away, &p).unwrap(), 0.0);

        let mid = (lo + hi) / 2.0;
        let both = SphericalOffset { azimuth: mid, elevation: -mid, radial: 0.5 };
        assert_abs_diff_eq!(attention_level(&both, &p).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn dof_cost_examples() {
        let r = DoFRange::new(-1.22, 1.22).unwrap();
        assert_abs_diff_eq!(dof_cost(0.0, &r), 1.0, epsilon = 1e-15);
        assert_eq!(dof_cost(-1.22, &r), 0.0);
        assert_eq!(dof_cost(1.22, &r), 0.0);
        assert_abs_diff_eq!(dof_cost(-1.22 + 0.25 * 2.44, &r), 0.5, epsilon = 1e-12);
        assert_eq!(dof_cost(5.0, &r), 0.0);
    }

    fn one_dof(name: &str, q: f64) -> HumanJoint<f64> {
        HumanJoint::new(name, vec![q], vec![DoFRange::new(0.0, 2.0).unwrap()]).unwrap()
    }

    #[test]
    fn posture_score_examples() {
        let model = HumanBodyModel::<f64>::right_arm_default();
        assert_abs_diff_eq!(posture_score(&model), 1.0, epsilon = 1e-12);

        let joints = vec![one_dof("a", 0.0), one_dof("b", 1.0), one_dof("c", 1.0)];
        let model = HumanBodyModel::new(joints, Pose::identity()).unwrap();
        assert_abs_diff_eq!(posture_score(&model), 2.0 / 3.0, epsilon = 1e-15);

        let model = HumanBodyModel::new(vec![one_dof("a", 0.5)], Pose::identity()).unwrap();
        let r = DoFRange::new(0.0, 2.0).unwrap();
        assert_eq!(posture_score(&model), dof_cost(0.5, &r));
    }

    fn series(levels: Vec<f64>) -> AttentionSeries<f64> {
        let ts = (0..levels.len()).map(|i| i as f64 * 0.01).collect();
        AttentionSeries::new(ts, levels).unwrap()
    }

    #[test]
    fn cognitive_cost_examples() {
        assert_eq!(cognitive_cost(0.0, &series(vec![1.0; 10])).unwrap(), 1.0);
        assert_eq!(cognitive_cost(1.0, &series(vec![0.0; 10])).unwrap(), 0.0);
        assert_abs_diff_eq!(cognitive_cost(0.2, &series(vec![0.4, 0.8, 0.6])).unwrap(), 0.7, epsilon = 1e-12);
        assert!(matches!(cognitive_cost(0.0, &series(vec![])), Err(Error::EmptySeries(_))));
    }

    #[test]
    fn physical_cost_examples() {
        let s = |v: Vec<f64>| PostureSeries::new(vec![0.0; v.len()], v).unwrap();
        assert_eq!(physical_cost(&s(vec![0.8; 5])).unwrap(), 0.8);
        assert_eq!(physical_cost(&s(vec![0.9, 0.3, 0.95])).unwrap(), 0.3);
        let mut spike = vec![1.0; 500];
        spike[250] = 0.0;
        assert_eq!(physical_cost(&s(spike)).unwrap(), 0.0);
        assert!(physical_cost(&s(vec![])).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let r = DoFRange::new(0.0f32, 2.0).unwrap();
        assert_eq!(dof_cost(1.0f32, &r), 1.0);
        let (lo, hi) = attention_limits(0.5f32, &AttentionParams::default()).unwrap();
        assert!((attention_membership((lo + hi) / 2.0, lo, hi).unwrap() - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn membership_is_even_and_lipschitz(
            alpha in -1.0..1.0f64,
            h in -1e-3..1e-3f64,
            lo in 0.01..0.3f64,
            width in 0.01..0.5f64,
        ) {
            let hi = lo + width;
            let f = attention_membership(alpha, lo, hi).unwrap();
            prop_assert_eq!(f, attention_membership(-alpha, lo, hi).unwrap());
            let g = attention_membership(alpha + h, lo, hi).unwrap();
            let bound = std::f64::consts::PI * h.abs() / (2.0 * width) + 1e-12;
            prop_assert!((g - f).abs() <= bound);
            prop_assert!((0.0..=1.0).contains(&f));
        }

        #[test]
        fn dof_cost_reflection_symmetry(a in -2.0..0.0f64, width in 0.1..3.0f64, u in 0.0..1.0f64) {
            let b = a + width;
            let r = DoFRange::new(a, b).unwrap();
            let q = a + u * width;
            prop_assert!((dof_cost(q, &r) - dof_cost(a + b - q, &r)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&dof_cost(q, &r)));
        }

        #[test]
        fn signals_stay_in_unit_interval(
            az in -3.1..3.1f64, el in -1.5..1.5f64, d in 0.01..3.0f64,
            r in 0.01..0.5f64, g in 0.01..0.99f64,
            latency in -10.0..20.0f64, duration in 0.1..10.0f64,
        ) {
            let p = AttentionParams::new(r, g).unwrap();
            let lvl = attention_level(&SphericalOffset { azimuth: az, elevation: el, radial: d }, &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&lvl));
            let tau = reaction_time(&obs(latency, duration)).unwrap();
            prop_assert!((0.0..=1.0).contains(&tau));
            let c = cognitive_cost(tau, &series(vec![lvl, 1.0 - lvl])).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
        }

        #[test]
        fn cognitive_cost_monotone(tau in 0.0..1.0f64, dt in 0.0..0.5f64, lvl in 0.0..1.0f64, dl in 0.0..0.5f64) {
            let base = cognitive_cost(tau, &series(vec![lvl])).unwrap();
            let more_focus = cognitive_cost(tau, &series(vec![(lvl + dl).min(1.0)])).unwrap();
            let slower = cognitive_cost((tau + dt).min(1.0), &series(vec![lvl])).unwrap();
            prop_assert!(more_focus >= base);
            prop_assert!(slower <= base);
        }
    }
}
