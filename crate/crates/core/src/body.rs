//! Human kinematic chain: joints with per-DoF ranges of motion, and the gaze
//! frame used by the attention model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, Pose, Quat, Vec3};
use crate::scalar::Real;

/// Admissible interval `[q_min, q_max]` of one degree of freedom, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoFRange<T> {
    pub q_min: T,
    pub q_max: T,
}

impl<T: Real> DoFRange<T> {
    pub fn new(q_min: T, q_max: T) -> Result<Self> {
        if !q_min.is_finite() || !q_max.is_finite() || q_min >= q_max {
            return Err(Error::InvalidModel(format!(
                "range of motion [{q_min}, {q_max}] must be finite with q_min < q_max"
            )));
        }
        Ok(Self { q_min, q_max })
    }

    pub fn midpoint(&self) -> T {
        (self.q_min + self.q_max) / T::lit(2.0)
    }

    pub fn span(&self) -> T {
        self.q_max - self.q_min
    }

    pub fn clamp(&self, q: T) -> T {
        q.clamp_to(self.q_min, self.q_max)
    }

    pub fn contains(&self, q: T, tolerance: T) -> bool {
        q >= self.q_min - tolerance && q <= self.q_max + tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanJoint<T> {
    pub name: String,
    pub angles: Vec<T>,
    pub ranges: Vec<DoFRange<T>>,
}

impl<T: Real> HumanJoint<T> {
    pub fn new(name: impl Into<String>, angles: Vec<T>, ranges: Vec<DoFRange<T>>) -> Result<Self> {
        let name = name.into();
        if ranges.is_empty() || ranges.len() > 3 {
            return Err(Error::InvalidModel(format!("joint {name}: {} DoFs, expected 1 to 3", ranges.len())));
        }
        if angles.len() != ranges.len() {
            return Err(Error::InvalidModel(format!(
                "joint {name}: {} angles for {} ranges",
                angles.len(),
                ranges.len()
            )));
        }
        Ok(Self { name, angles, ranges })
    }

    /// Joint resting at the midpoint of every range.
    pub fn at_midpoints(name: impl Into<String>, ranges: Vec<DoFRange<T>>) -> Result<Self> {
        let angles = ranges.iter().map(DoFRange::midpoint).collect();
        Self::new(name, angles, ranges)
    }

    pub fn dof_count(&self) -> usize {
        self.ranges.len()
    }
}

/// One angle found outside its range of motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RomViolation<T> {
    pub joint: usize,
    pub joint_name: String,
    pub dof: usize,
    pub angle: T,
    pub range: DoFRange<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanBodyModel<T> {
    pub joints: Vec<HumanJoint<T>>,
    pub head_pose: Pose<T>,
}

impl<T: Real> HumanBodyModel<T> {
    pub fn new(joints: Vec<HumanJoint<T>>, head_pose: Pose<T>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::InvalidModel("body model needs at least one joint".into()));
        }
        Ok(Self { joints, head_pose: Pose::new(head_pose.position, head_pose.orientation) })
    }

    /// Right elbow (flexion) and right wrist (flexion, deviation) at mid-range.
    pub fn right_arm_default() -> Self {
        let r = |a: f64, b: f64| DoFRange::new(T::lit(a), T::lit(b)).expect("static range");
        let joints = vec![
            HumanJoint::at_midpoints("right_elbow", vec![r(0.0, 2.53)]).expect("static joint"),
            HumanJoint::at_midpoints("right_wrist", vec![r(-1.22, 1.22), r(-0.52, 0.61)]).expect("static joint"),
        ];
        Self::new(joints, Pose::identity()).expect("static model")
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    /// Writes sensor angles into a joint, clamping each into its range and
    /// reporting the ones that were beyond `tolerance`.
    pub fn ingest_angles(&mut self, joint: usize, angles: &[T], tolerance: T) -> Result<Vec<RomViolation<T>>> {
        let j =
            self.joints.get_mut(joint).ok_or_else(|| Error::InvalidModel(format!("no joint with index {joint}")))?;
        if angles.len() != j.dof_count() {
            return Err(Error::InvalidModel(format!(
                "joint {}: got {} angles for {} DoFs",
                j.name,
                angles.len(),
                j.dof_count()
            )));
        }
        let mut violations = Vec::new();
        for (dof, (&q, range)) in angles.iter().zip(&j.ranges).enumerate() {
            if !range.contains(q, tolerance) {
                violations.push(RomViolation { joint, joint_name: j.name.clone(), dof, angle: q, range: *range });
            }
            j.angles[dof] = range.clamp(q);
        }
        Ok(violations)
    }
}

/// Every (joint, DoF) whose angle lies outside its range by more than `tolerance`.
pub fn validate_rom<T: Real>(model: &HumanBodyModel<T>, tolerance: T) -> Vec<RomViolation<T>> {
    model
        .joints
        .iter()
        .enumerate()
        .flat_map(|(i, joint)| {
            joint
                .angles
                .iter()
                .zip(&joint.ranges)
                .enumerate()
                .filter(|(_, (&q, range))| !range.contains(q, tolerance))
                .map(move |(k, (&q, range))| RomViolation {
                    joint: i,
                    joint_name: joint.name.clone(),
                    dof: k,
                    angle: q,
                    range: *range,
                })
        })
        .collect()
}

/// Placement of the gaze frame relative to the tracked head frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeGeometry<T> {
    /// Head-link center, expressed in the head frame (m).
    pub center_offset: Vec3<T>,
    /// Downward tilt about the head's lateral axis (rad).
    pub pitch_down: T,
}

impl<T: Real> Default for GazeGeometry<T> {
    fn default() -> Self {
        Self { center_offset: [T::lit(0.05), T::zero(), T::zero()], pitch_down: T::lit(10.0).to_radians() }
    }
}

/// Gaze frame: the head frame moved to the head-link center and pitched down.
///
/// Not idempotent; applying it twice tilts by twice the angle.
pub fn gaze_frame<T: Real>(head_pose: &Pose<T>, geometry: &GazeGeometry<T>) -> Pose<T> {
    let origin = head_pose.transform_point(geometry.center_offset);
    let tilt = Quat::from_pitch(geometry.pitch_down);
    Pose::new(origin, head_pose.orientation.mul(&tilt))
}

/// Object position relative to a frame, in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalOffset<T> {
    /// Azimuth in `(-pi, pi]`, positive to the left.
    pub azimuth: T,
    /// Elevation in `[-pi/2, pi/2]`, positive up.
    pub elevation: T,
    pub radial: T,
}

pub fn relative_spherical<T: Real>(gaze: &Pose<T>, object_position: Vec3<T>) -> Result<SphericalOffset<T>> {
    if object_position.iter().any(|c| !c.is_finite()) {
        return Err(Error::DegenerateGeometry("object position is not finite".into()));
    }
    let local = gaze.inverse_transform_point(object_position);
    let radial = norm(local);
    if radial < T::lit(1e-9) {
        return Err(Error::DegenerateGeometry("object coincides with the gaze origin".into()));
    }
    let mut azimuth = local[1].atan2(local[0]);
    if azimuth <= -T::PI() {
        azimuth = T::PI();
    }
    let horizontal = local[0].hypot(local[1]);
    let elevation = local[2].atan2(horizontal);
    Ok(SphericalOffset { azimuth, elevation, radial })
}
