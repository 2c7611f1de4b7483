//! Parametric handover trajectories for an M-joint manipulator, synthesized
//! joint torques, and the resulting power and energy.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bandit::ArmSpec;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Configuration-dependent gravity torque.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GravityMap<T> {
    None,
    Constant {
        torques: Vec<T>,
    },
    /// Two links moving in a vertical plane, angles measured from the vertical.
    ///
    /// `upper_moment` and `fore_moment` are the gravity moments (N m) acting
    /// about the shoulder and the elbow when the links are horizontal.
    Planar {
        shoulder: usize,
        elbow: usize,
        upper_moment: T,
        fore_moment: T,
    },
}

impl<T: Real> GravityMap<T> {
    pub fn torques(&self, q: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); q.len()];
        match self {
            GravityMap::None => {}
            GravityMap::Constant { torques } => {
                for (o, t) in out.iter_mut().zip(torques) {
                    *o = *t;
                }
            }
            GravityMap::Planar { shoulder, elbow, upper_moment, fore_moment } => {
                let s = q[*shoulder];
                let se = s + q[*elbow];
                out[*shoulder] = *upper_moment * s.sin() + *fore_moment * se.sin();
                out[*elbow] = *fore_moment * se.sin();
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel<T> {
    /// Diagonal joint inertia (kg m^2).
    pub inertia: Vec<T>,
    /// Viscous friction (N m s / rad).
    pub viscous_friction: Vec<T>,
    pub gravity: GravityMap<T>,
    pub lower_limits: Vec<T>,
    pub upper_limits: Vec<T>,
}

impl<T: Real> RobotModel<T> {
    pub fn new(
        inertia: Vec<T>,
        viscous_friction: Vec<T>,
        gravity: GravityMap<T>,
        lower_limits: Vec<T>,
        upper_limits: Vec<T>,
    ) -> Result<Self> {
        let model = Self { inertia, viscous_friction, gravity, lower_limits, upper_limits };
        model.validate()?;
        Ok(model)
    }

    /// Single frictionless joint with unbounded limits.
    pub fn single_joint(inertia: T) -> Self {
        Self {
            inertia: vec![inertia],
            viscous_friction: vec![T::zero()],
            gravity: GravityMap::None,
            lower_limits: vec![-T::infinity()],
            upper_limits: vec![T::infinity()],
        }
    }

    /// Seven-joint arm with limits of a common collaborative manipulator.
    pub fn seven_dof_default() -> Self {
        let v = |xs: [f64; 7]| xs.iter().map(|&x| T::lit(x)).collect::<Vec<_>>();
        Self {
            inertia: v([0.60, 0.80, 0.40, 0.50, 0.10, 0.08, 0.02]),
            viscous_friction: v([0.05, 0.05, 0.05, 0.05, 0.02, 0.02, 0.01]),
            gravity: GravityMap::Planar { shoulder: 1, elbow: 3, upper_moment: T::lit(3.0), fore_moment: T::lit(1.5) },
            lower_limits: v([-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973]),
            upper_limits: v([2.8973, 1.7628, 2.8973, 3.0718, 2.8973, 3.7525, 2.8973]),
        }
    }

    pub fn joint_count(&self) -> usize {
        self.inertia.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.joint_count();
        if m == 0 {
            return Err(Error::InvalidModel("robot needs at least one joint".into()));
        }
        if self.viscous_friction.len() != m || self.lower_limits.len() != m || self.upper_limits.len() != m {
            return Err(Error::InvalidModel(format!("robot parameter lists must all have {m} entries")));
        }
        if self.inertia.iter().any(|i| !(*i > T::zero())) {
            return Err(Error::InvalidModel("joint inertia must be positive".into()));
        }
        if self.viscous_friction.iter().any(|b| !(*b >= T::zero())) {
            return Err(Error::InvalidModel("viscous friction must be nonnegative".into()));
        }
        if self.lower_limits.iter().zip(&self.upper_limits).any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidModel("joint limits must satisfy lower < upper".into()));
        }
        match &self.gravity {
            GravityMap::None => {}
            GravityMap::Constant { torques } if torques.len() != m => {
                return Err(Error::InvalidModel("constant gravity torques need one entry per joint".into()))
            }
            GravityMap::Planar { shoulder, elbow, .. } if *shoulder >= m || *elbow >= m => {
                return Err(Error::InvalidModel("planar gravity joint index out of range".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &[T]) -> bool {
        q.iter().zip(self.lower_limits.iter().zip(&self.upper_limits)).all(|(x, (lo, hi))| x >= lo && x <= hi)
    }
}

/// Reduced kinematics used to place the object: a yawing base and a
/// shoulder/elbow pair moving in the vertical plane, plus a wrist yaw that
/// sets the handle orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarReach<T> {
    pub base_yaw: usize,
    pub shoulder: usize,
    pub elbow: usize,
    pub wrist_yaw: usize,
    /// Shoulder axis height above the robot base (m).
    pub shoulder_height: T,
    pub upper_link: T,
    pub fore_link: T,
}

impl<T: Real> Default for PlanarReach<T> {
    fn default() -> Self {
        Self {
            base_yaw: 0,
            shoulder: 1,
            elbow: 3,
            wrist_yaw: 6,
            shoulder_height: T::lit(0.333),
            upper_link: T::lit(0.40),
            fore_link: T::lit(0.45),
        }
    }
}

impl<T: Real> PlanarReach<T> {
    /// Object position in the robot base frame.
    pub fn end_effector(&self, q: &[T]) -> Vec3<T> {
        let (s, e) = (q[self.shoulder], q[self.elbow]);
        let reach = self.upper_link * s.sin() + self.fore_link * (s + e).sin();
        let z = self.shoulder_height + self.upper_link * s.cos() + self.fore_link * (s + e).cos();
        let yaw = q[self.base_yaw];
        [reach * yaw.cos(), reach * yaw.sin(), z]
    }

    /// Shoulder and elbow angles placing the wrist at horizontal `reach` and
    /// height `z` above the base.
    pub fn solve(&self, reach: T, z: T) -> Result<(T, T)> {
        let dz = z - self.shoulder_height;
        let dist = reach.hypot(dz);
        let (l1, l2) = (self.upper_link, self.fore_link);
        if dist > l1 + l2 || dist < (l1 - l2).abs() {
            return Err(Error::Unreachable(format!("target at {dist} m from the shoulder, links {l1} + {l2}")));
        }
        let cos_e = ((dist * dist - l1 * l1 - l2 * l2) / (T::lit(2.0) * l1 * l2)).clamp_to(-T::one(), T::one());
        let e = cos_e.acos();
        let s = reach.atan2(dz) - (l2 * e.sin()).atan2(l1 + l2 * e.cos());
        Ok((s, e))
    }

    fn check(&self, m: usize) -> Result<()> {
        if [self.base_yaw, self.shoulder, self.elbow, self.wrist_yaw].iter().any(|&i| i >= m) {
            return Err(Error::InvalidModel(format!("reach joint index beyond {m} joints")));
        }
        Ok(())
    }
}

/// Where the robot picks the object and where the human sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig<T> {
    /// Fixed start configuration grasping the object on the table.
    pub grasp_configuration: Vec<T>,
    pub reach: PlanarReach<T>,
    /// Base yaw pointing at the human (rad).
    pub human_yaw: T,
    /// Horizontal distance from robot base to the human chest reference (m).
    pub human_distance: T,
    /// Handover height above the robot base (m).
    pub handover_height: T,
    /// Extra height of the intermediate waypoint (m).
    pub lift_height: T,
    /// Trajectory sampling rate (Hz).
    pub sample_rate: T,
}

impl<T: Real> SceneConfig<T> {
    pub fn seven_dof_default() -> Self {
        Self {
            grasp_configuration: [-1.2, 0.9, 0.0, 1.4, 0.0, 1.6, 0.0].iter().map(|&x| T::lit(x)).collect(),
            reach: PlanarReach::default(),
            human_yaw: T::zero(),
            human_distance: T::lit(0.95),
            handover_height: T::lit(0.35),
            lift_height: T::lit(0.10),
            sample_rate: T::lit(100.0),
        }
    }

    /// Object position in the robot base frame for the handover pose of `arm`.
    pub fn handover_point(&self, distance: T) -> Vec3<T> {
        let reach = self.human_distance - distance;
        [reach * self.human_yaw.cos(), reach * self.human_yaw.sin(), self.handover_height]
    }

    /// Human chest reference in the robot base frame (at handover height).
    pub fn human_reference(&self) -> Vec3<T> {
        self.handover_point(T::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample<T> {
    pub time: T,
    pub q: Vec<T>,
    pub qdot: Vec<T>,
    pub torque: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotTrajectory<T> {
    pub samples: Vec<TrajectorySample<T>>,
    pub duration: T,
    pub waypoints: Vec<(T, Vec<T>)>,
}

impl<T: Real> RobotTrajectory<T> {
    pub fn final_configuration(&self) -> &[T] {
        &self.samples.last().expect("trajectory has samples").q
    }

    pub fn peak_speed(&self) -> T {
        self.samples.iter().flat_map(|s| s.qdot.iter().map(|v| v.abs())).fold(T::zero(), T::max)
    }

    pub fn peak_power(&self) -> T {
        self.samples.iter().map(instantaneous_power).fold(T::zero(), T::max)
    }

    /// Writes `t, q.., qdot.., tau.., P` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let m = self.samples.first().map_or(0, |s| s.q.len());
        let mut header = vec!["t".to_string()];
        for prefix in ["q", "qdot", "tau"] {
            header.extend((0..m).map(|j| format!("{prefix}{j}")));
        }
        header.push("P".into());
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row = vec![s.time.to_string()];
            row.extend(s.q.iter().chain(&s.qdot).chain(&s.torque).map(ToString::to_string));
            row.push(instantaneous_power(s).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Minimum-jerk phase `s(u)` and its time derivative for `u = t / duration`.
pub fn minimum_jerk<T: Real>(u: T, duration: T) -> (T, T) {
    let u = u.clamp_unit();
    let u2 = u * u;
    let u3 = u2 * u;
    let s = u3 * (T::lit(10.0) - T::lit(15.0) * u + T::lit(6.0) * u2);
    let ds = T::lit(30.0) * u2 * (T::one() - u) * (T::one() - u) / duration;
    (s, ds)
}

/// Smooth joint-space path from `start` to `goal` through an optional `via`
/// configuration (reached at mid-phase), timed by the minimum-jerk law and
/// sampled at `rate`. Torques are left at zero.
pub fn minimum_jerk_trajectory<T: Real>(
    start: &[T],
    via: Option<&[T]>,
    goal: &[T],
    duration: T,
    rate: T,
) -> Result<RobotTrajectory<T>> {
    if !(duration > T::zero()) {
        return Err(Error::InvalidDuration(duration.to_f64().unwrap_or(f64::NAN)));
    }
    if !(rate > T::zero()) || start.len() != goal.len() || via.is_some_and(|v| v.len() != start.len()) {
        return Err(Error::InvalidModel("inconsistent trajectory request".into()));
    }
    let half = T::lit(0.5);
    // quadratic Bezier control point so the curve passes through `via` at mid-phase
    let control: Vec<T> = match via {
        Some(v) => {
            v.iter().zip(start.iter().zip(goal)).map(|(&m, (&a, &b))| T::lit(2.0) * m - half * (a + b)).collect()
        }
        None => start.iter().zip(goal).map(|(&a, &b)| half * (a + b)).collect(),
    };
    let intervals = (duration * rate).round().to_usize().unwrap_or(1).max(1);
    let samples = (0..=intervals)
        .map(|i| {
            let time = if i == intervals { duration } else { duration * T::from_count(i) / T::from_count(intervals) };
            let (s, ds) = minimum_jerk(time / duration, duration);
            let one_s = T::one() - s;
            let mut q = Vec::with_capacity(start.len());
            let mut qdot = Vec::with_capacity(start.len());
            for ((&p0, &p1), &p2) in start.iter().zip(&control).zip(goal) {
                q.push(one_s * one_s * p0 + T::lit(2.0) * s * one_s * p1 + s * s * p2);
                let dq_ds = T::lit(2.0) * (one_s * (p1 - p0) + s * (p2 - p1));
                qdot.push(dq_ds * ds);
            }
            TrajectorySample { time, q, qdot, torque: vec![T::zero(); start.len()] }
        })
        .collect();
    let mut waypoints = vec![(T::zero(), start.to_vec())];
    if let Some(v) = via {
        waypoints.push((duration * half, v.to_vec()));
    }
    waypoints.push((duration, goal.to_vec()));
    Ok(RobotTrajectory { samples, duration, waypoints })
}

/// Joint configuration presenting the object for `arm`.
pub fn handover_configuration<T: Real>(
    arm: &ArmSpec<T>,
    robot: &RobotModel<T>,
    scene: &SceneConfig<T>,
) -> Result<Vec<T>> {
    let reach = scene.human_distance - arm.distance;
    let (s, e) = scene.reach.solve(reach, scene.handover_height)?;
    let mut goal = scene.grasp_configuration.clone();
    goal[scene.reach.base_yaw] = scene.human_yaw;
    goal[scene.reach.shoulder] = s;
    goal[scene.reach.elbow] = e;
    goal[scene.reach.wrist_yaw] = arm.orientation;
    if !robot.within_limits(&goal) {
        return Err(Error::Unreachable(format!("handover pose for arm {} violates joint limits", arm.index)));
    }
    Ok(goal)
}

/// Plans the approach from the grasp configuration to the handover pose of
/// `arm`, lifting the object between the two, and synthesizes torques.
pub fn plan_trajectory<T: Real>(
    arm: &ArmSpec<T>,
    robot: &RobotModel<T>,
    scene: &SceneConfig<T>,
) -> Result<RobotTrajectory<T>> {
    robot.validate()?;
    let m = robot.joint_count();
    scene.reach.check(m)?;
    if scene.grasp_configuration.len() != m {
        return Err(Error::InvalidModel(format!("grasp configuration needs {m} angles")));
    }
    if !robot.within_limits(&scene.grasp_configuration) {
        return Err(Error::Unreachable("grasp configuration violates joint limits".into()));
    }
    if !(arm.duration > T::zero()) || !arm.orientation.is_finite() {
        return Err(Error::InvalidArm(format!("arm {} has invalid duration or orientation", arm.index)));
    }
    if !(arm.distance > T::zero() && arm.distance < scene.human_distance) {
        return Err(Error::InvalidArm(format!(
            "arm {} distance {} outside (0, {})",
            arm.index, arm.distance, scene.human_distance
        )));
    }

    let start = &scene.grasp_configuration;
    let goal = handover_configuration(arm, robot, scene)?;

    let a = scene.reach.end_effector(start);
    let b = scene.reach.end_effector(&goal);
    let half = T::lit(0.5);
    let mid_reach = half * (a[0].hypot(a[1]) + b[0].hypot(b[1]));
    let mid_z = half * (a[2] + b[2]) + scene.lift_height;
    let (s, e) = scene.reach.solve(mid_reach, mid_z)?;
    let mut via: Vec<T> = start.iter().zip(&goal).map(|(&x, &y)| half * (x + y)).collect();
    via[scene.reach.shoulder] = s;
    via[scene.reach.elbow] = e;
    if !robot.within_limits(&via) {
        return Err(Error::Unreachable("lift waypoint violates joint limits".into()));
    }

    let traj = minimum_jerk_trajectory(start, Some(&via), &goal, arm.duration, scene.sample_rate)?;
    Ok(compute_torques(traj, robot))
}

/// Fills `tau = I qddot + b qdot + g(q)`, with accelerations from finite
/// differences of the sampled velocities.
pub fn compute_torques<T: Real>(mut traj: RobotTrajectory<T>, robot: &RobotModel<T>) -> RobotTrajectory<T> {
    let n = traj.samples.len();
    let m = robot.joint_count();
    let accel = |i: usize, j: usize, s: &[TrajectorySample<T>]| -> T {
        if n < 2 {
            return T::zero();
        }
        if n == 2 {
            return (s[1].qdot[j] - s[0].qdot[j]) / (s[1].time - s[0].time);
        }
        if i == 0 {
            let h = (s[2].time - s[0].time) / T::lit(2.0);
            (-T::lit(3.0) * s[0].qdot[j] + T::lit(4.0) * s[1].qdot[j] - s[2].qdot[j]) / (T::lit(2.0) * h)
        } else if i == n - 1 {
            let h = (s[n - 1].time - s[n - 3].time) / T::lit(2.0);
            (T::lit(3.0) * s[n - 1].qdot[j] - T::lit(4.0) * s[n - 2].qdot[j] + s[n - 3].qdot[j]) / (T::lit(2.0) * h)
        } else {
            (s[i + 1].qdot[j] - s[i - 1].qdot[j]) / (s[i + 1].time - s[i - 1].time)
        }
    };
    let torques: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let g = robot.gravity.torques(&traj.samples[i].q);
            (0..m)
                .map(|j| {
                    robot.inertia[j] * accel(i, j, &traj.samples)
                        + robot.viscous_friction[j] * traj.samples[i].qdot[j]
                        + g[j]
                })
                .collect()
        })
        .collect();
    for (sample, tau) in traj.samples.iter_mut().zip(torques) {
        sample.torque = tau;
    }
    traj
}

/// Total mechanical power `sum_j |tau_j qdot_j|` (W).
pub fn instantaneous_power<T: Real>(sample: &TrajectorySample<T>) -> T {
    sample.torque.iter().zip(&sample.qdot).map(|(t, v)| (*t * *v).abs()).sum()
}

/// Trapezoidal integral of the instantaneous power (J).
pub fn energy<T: Real>(traj: &RobotTrajectory<T>) -> Result<T> {
    if traj.samples.len() < 2 {
        return Err(Error::InsufficientSamples(traj.samples.len()));
    }
    let half = T::lit(0.5);
    Ok(traj
        .samples
        .windows(2)
        .map(|w| (w[1].time - w[0].time) * half * (instantaneous_power(&w[0]) + instantaneous_power(&w[1])))
        .sum())
}
