//! Synthetic human responders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{ArmGrid, ArmSpec};
use crate::body::{DoFRange, HumanBodyModel, HumanJoint};
use crate::error::{Error, Result};
use crate::geometry::Pose;

/// How a signal reacts to the mismatch between an arm and the preference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// Degrades as the mismatch grows.
    #[default]
    Responsive,
    /// Ignores the arm entirely.
    Pinned,
    /// Degrades as the arm gets closer to the preference.
    Contrarian,
}

/// Seated right-arm reach used to synthesize postures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanReach {
    /// Right shoulder relative to the chest reference, (forward, left, up) in m.
    /// `None` places the shoulder so the preferred distance puts the elbow at
    /// mid-range, moved forward if needed to keep the farthest grid distance reachable.
    pub shoulder_forward: Option<f64>,
    pub shoulder_left: f64,
    pub shoulder_up: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    /// Wrist flexion per radian of elbow flexion away from the preferred posture.
    pub wrist_flexion_coupling: f64,
    /// Wrist deviation per radian of handle yaw away from the preferred yaw.
    pub wrist_deviation_gain: f64,
}

impl Default for HumanReach {
    fn default() -> Self {
        Self {
            shoulder_forward: None,
            shoulder_left: -0.18,
            shoulder_up: 0.20,
            upper_arm: 0.30,
            forearm: 0.30,
            wrist_flexion_coupling: 0.5,
            wrist_deviation_gain: 0.2,
        }
    }
}

/// Ground-truth preferences, sensitivities and noise of one synthetic subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanProfile {
    pub name: String,
    pub preferred_orientation: f64,
    pub preferred_distance: f64,
    pub preferred_duration: f64,
    /// Mismatch per radian of orientation error.
    pub sensitivity_orientation: f64,
    /// Mismatch per `distance_scale` of distance error.
    pub sensitivity_distance: f64,
    /// Mismatch per `duration_scale` of duration error.
    pub sensitivity_duration: f64,
    pub distance_scale: f64,
    pub duration_scale: f64,
    pub baseline_attention: f64,
    pub baseline_reaction: f64,
    pub attention_noise: f64,
    pub reaction_noise: f64,
    /// Per-sample joint angle noise (rad).
    pub posture_noise: f64,
    /// Additive noise on the observed score.
    pub reward_noise: f64,
    pub attention_response: Response,
    pub reaction_response: Response,
    /// `Pinned` keeps the posture of the preferred arm whatever the robot does.
    pub posture_response: Response,
    pub body: HumanBodyModel<f64>,
    pub reach: HumanReach,
    /// Head position relative to the chest reference, (forward, left, up) in m.
    pub head_offset: [f64; 3],
}

impl Default for HumanProfile {
    fn default() -> Self {
        Self {
            name: "default".into(),
            preferred_orientation: std::f64::consts::FRAC_PI_2,
            preferred_distance: 0.45,
            preferred_duration: 8.0,
            sensitivity_orientation: 0.25,
            sensitivity_distance: 0.3,
            sensitivity_duration: 0.3,
            distance_scale: 0.15,
            duration_scale: 3.0,
            baseline_attention: 0.9,
            baseline_reaction: 0.1,
            attention_noise: 0.0,
            reaction_noise: 0.0,
            posture_noise: 0.0,
            reward_noise: 0.02,
            attention_response: Response::Responsive,
            reaction_response: Response::Responsive,
            posture_response: Response::Responsive,
            body: HumanBodyModel::right_arm_default(),
            reach: HumanReach::default(),
            head_offset: [-0.05, 0.0, 0.45],
        }
    }
}

pub const PRESETS: [&str; 3] = ["default", "overfocused", "contrarian"];

impl HumanProfile {
    /// Named preset: `default`, `overfocused`, `contrarian`, or `cohort-<n>`
    /// (a randomized subject drawn deterministically from `n`).
    pub fn preset(name: &str, grid: &ArmGrid<f64>) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "overfocused" => Ok(Self::overfocused()),
            "contrarian" => Ok(Self::contrarian()),
            other => match other.strip_prefix("cohort-").and_then(|n| n.parse::<u64>().ok()) {
                Some(n) => Ok(Self::cohort_member(n, grid)),
                None => Err(Error::ConfigInvalid(format!(
                    "unknown profile preset {other:?}; expected one of {PRESETS:?} or cohort-<n>"
                ))),
            },
        }
    }

    /// Attends and reacts identically whatever the robot does; only robot
    /// energy remains informative.
    pub fn overfocused() -> Self {
        Self {
            name: "overfocused".into(),
            preferred_distance: 0.30,
            preferred_duration: 5.0,
            baseline_attention: 1.0,
            attention_response: Response::Pinned,
            reaction_response: Response::Pinned,
            posture_response: Response::Pinned,
            ..Self::default()
        }
    }

    /// Gets distracted and slow to react precisely when the robot moves the
    /// way the subject prefers.
    pub fn contrarian() -> Self {
        Self {
            name: "contrarian".into(),
            sensitivity_orientation: 0.4,
            sensitivity_distance: 0.4,
            sensitivity_duration: 0.4,
            attention_response: Response::Contrarian,
            reaction_response: Response::Contrarian,
            ..Self::default()
        }
    }

    /// Randomized subject with grid-valued preferences.
    pub fn cohort_member(n: u64, grid: &ArmGrid<f64>) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0E7_F1C1_E4C7 ^ n);
        let mut pick = |axis: &[f64]| axis[rng.random_range(0..axis.len())];
        let (b, d, t) = (pick(&grid.orientations), pick(&grid.distances), pick(&grid.durations));
        Self {
            name: format!("cohort-{n}"),
            preferred_orientation: b,
            preferred_distance: d,
            preferred_duration: t,
            sensitivity_orientation: rng.random_range(0.2..0.4),
            sensitivity_distance: rng.random_range(0.25..0.5),
            sensitivity_duration: rng.random_range(0.5..0.9),
            baseline_attention: rng.random_range(0.75..0.95),
            baseline_reaction: rng.random_range(0.05..0.2),
            attention_noise: 0.05,
            reaction_noise: 0.05,
            posture_noise: 0.01,
            ..Self::default()
        }
    }

    pub fn preference(&self) -> [f64; 3] {
        [self.preferred_orientation, self.preferred_distance, self.preferred_duration]
    }

    pub fn is_noiseless(&self) -> bool {
        self.attention_noise == 0.0 && self.reaction_noise == 0.0 && self.posture_noise == 0.0
    }

    /// Same subject with every noise source switched off.
    pub fn noiseless(&self) -> Self {
        Self { attention_noise: 0.0, reaction_noise: 0.0, posture_noise: 0.0, reward_noise: 0.0, ..self.clone() }
    }

    /// Weighted distance between an arm and the preference.
    pub fn mismatch(&self, arm: &ArmSpec<f64>) -> f64 {
        self.sensitivity_orientation * (arm.orientation - self.preferred_orientation).abs()
            + self.sensitivity_distance * (arm.distance - self.preferred_distance).abs() / self.distance_scale
            + self.sensitivity_duration * (arm.duration - self.preferred_duration).abs() / self.duration_scale
    }

    pub fn validate(&self, grid: &ArmGrid<f64>) -> Result<()> {
        let within = |v: f64, axis: &[f64]| {
            let lo = axis.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = axis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v >= lo && v <= hi
        };
        if !within(self.preferred_orientation, &grid.orientations)
            || !within(self.preferred_distance, &grid.distances)
            || !within(self.preferred_duration, &grid.durations)
        {
            return Err(Error::ConfigInvalid(format!(
                "profile {}: preferences must lie within the grid ranges",
                self.name
            )));
        }
        let nonneg = [
            ("sensitivity_orientation", self.sensitivity_orientation),
            ("sensitivity_distance", self.sensitivity_distance),
            ("sensitivity_duration", self.sensitivity_duration),
            ("attention_noise", self.attention_noise),
            ("reaction_noise", self.reaction_noise),
            ("posture_noise", self.posture_noise),
            ("reward_noise", self.reward_noise),
        ];
        if let Some((name, _)) = nonneg.iter().find(|(_, v)| !(*v >= 0.0)) {
            return Err(Error::ConfigInvalid(format!("profile {}: {name} must be nonnegative", self.name)));
        }
        if !(self.distance_scale > 0.0 && self.duration_scale > 0.0) {
            return Err(Error::ConfigInvalid("profile scales must be positive".into()));
        }
        if !(self.baseline_attention > 0.0 && self.baseline_attention <= 1.0) {
            return Err(Error::ConfigInvalid("baseline_attention must lie in (0, 1]".into()));
        }
        if !(self.baseline_reaction >= 0.0 && self.baseline_reaction < 1.0) {
            return Err(Error::ConfigInvalid("baseline_reaction must lie in [0, 1)".into()));
        }
        if self.body.joints.len() < 2 || self.body.joints[0].dof_count() < 1 || self.body.joints[1].dof_count() < 2 {
            return Err(Error::ConfigInvalid("profile body needs an elbow (1 DoF) followed by a wrist (2 DoF)".into()));
        }
        if !(self.reach.upper_arm > 0.0 && self.reach.forearm > 0.0) {
            return Err(Error::ConfigInvalid("arm segment lengths must be positive".into()));
        }
        Ok(())
    }
}

/// Builds a body model from `(name, [(q_min, q_max)..])` entries at mid-range.
pub fn body_from_ranges(joints: &[(String, Vec<(f64, f64)>)]) -> Result<HumanBodyModel<f64>> {
    let joints = joints
        .iter()
        .map(|(name, ranges)| {
            let ranges = ranges.iter().map(|&(lo, hi)| DoFRange::new(lo, hi)).collect::<Result<Vec<_>>>()?;
            HumanJoint::at_midpoints(name.clone(), ranges)
        })
        .collect::<Result<Vec<_>>>()?;
    HumanBodyModel::new(joints, Pose::identity())
}
