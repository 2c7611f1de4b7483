//! Minimal rigid-body geometry: 3-vectors, unit quaternions and poses.
//!
//! Frames follow the robotics convention x forward, y left, z up.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

pub type Vec3<T> = [T; 3];

pub fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale<T: Real>(a: Vec3<T>, k: T) -> Vec3<T> {
    [a[0] * k, a[1] * k, a[2] * k]
}

pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm<T: Real>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

/// Unit quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quat<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Quat<T> {
    pub fn identity() -> Self {
        Self { w: T::one(), x: T::zero(), y: T::zero(), z: T::zero() }
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let n = norm(axis);
        if n == T::zero() {
            return Self::identity();
        }
        let half = angle / T::lit(2.0);
        let s = half.sin() / n;
        Self { w: half.cos(), x: axis[0] * s, y: axis[1] * s, z: axis[2] * s }
    }

    pub fn from_yaw(yaw: T) -> Self {
        Self::from_axis_angle([T::zero(), T::zero(), T::one()], yaw)
    }

    pub fn from_pitch(pitch: T) -> Self {
        Self::from_axis_angle([T::zero(), T::one(), T::zero()], pitch)
    }

    pub fn magnitude(&self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let m = self.magnitude();
        Self { w: self.w / m, x: self.x / m, y: self.y / m, z: self.z / m }
    }

    pub fn conjugate(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Hamilton product `self * rhs` (apply `rhs` first, then `self`).
    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (self, rhs);
        Self {
            w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        }
    }

    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        let u = [self.x, self.y, self.z];
        let two = T::lit(2.0);
        let t = scale(cross(u, v), two);
        add(add(v, scale(t, self.w)), cross(u, t))
    }

    pub fn inverse_rotate(&self, v: Vec3<T>) -> Vec3<T> {
        self.conjugate().rotate(v)
    }
}

/// Rigid pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose<T> {
    pub position: Vec3<T>,
    pub orientation: Quat<T>,
}

impl<T: Real> Pose<T> {
    /// Builds a pose, renormalizing the orientation.
    pub fn new(position: Vec3<T>, orientation: Quat<T>) -> Self {
        Self { position, orientation: orientation.normalized() }
    }

    pub fn identity() -> Self {
        Self::new([T::zero(); 3], Quat::identity())
    }

    /// Maps a point expressed in this frame into the parent frame.
    pub fn transform_point(&self, local: Vec3<T>) -> Vec3<T> {
        add(self.position, self.orientation.rotate(local))
    }

    /// Maps a parent-frame point into this frame.
    pub fn inverse_transform_point(&self, world: Vec3<T>) -> Vec3<T> {
        self.orientation.inverse_rotate(sub(world, self.position))
    }

    pub fn forward(&self) -> Vec3<T> {
        self.orientation.rotate([T::one(), T::zero(), T::zero()])
    }

    /// Elevation of the forward axis above the world horizontal plane.
    pub fn pitch(&self) -> T {
        self.forward()[2].clamp_to(-T::one(), T::one()).asin()
    }

    /// Left-multiplies both position and orientation by a world rotation.
    pub fn rotated_by(&self, q: &Quat<T>) -> Self {
        Self::new(q.rotate(self.position), q.mul(&self.orientation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn yaw_rotates_x_onto_y() {
        let q = Quat::from_yaw(std::f64::consts::FRAC_PI_2);
        let v = q.rotate([1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn positive_pitch_points_forward_axis_down() {
        let q = Quat::from_pitch(0.3f64);
        let v = q.rotate([1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(v[2], -(0.3f64.sin()), epsilon = 1e-15);
    }

    #[test]
    fn pose_round_trip() {
        let pose = Pose::new([0.1, -0.4, 1.2], Quat::from_axis_angle([0.3, 0.2, 0.9], 1.1));
        let p = [0.7, 0.2, -0.5];
        let back = pose.transform_point(pose.inverse_transform_point(p));
        for k in 0..3 {
            assert_abs_diff_eq!(back[k], p[k], epsilon = 1e-12);
        }
    }
}
