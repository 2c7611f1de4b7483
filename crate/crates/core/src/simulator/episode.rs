//! Episode synthesis: turns an arm into the signals a handover would produce
//! for a given synthetic subject.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::profile::{HumanProfile, Response};
use crate::bandit::{ArmGrid, ArmSpec};
use crate::body::{gaze_frame, relative_spherical, GazeGeometry, HumanBodyModel, SphericalOffset};
use crate::coefficiency::{
    evaluate_episode, CoefficiencyBreakdown, CoefficiencyWeights, EnergyNormalization, EpisodeObservation,
};
use crate::ergonomics::{
    attention_level, attention_limits, posture_score, reaction_time, AttentionParams, AttentionSeries, PostureSeries,
    ReactionObservation,
};
use crate::error::{Error, Result};
use crate::geometry::{add, norm, scale, sub, Pose, Quat, Vec3};
use crate::robot::{energy, minimum_jerk, plan_trajectory, RobotModel, RobotTrajectory, SceneConfig};

/// Slack kept between the farthest handover and full arm extension (m).
const REACH_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSettings {
    pub attention: AttentionParams<f64>,
    pub gaze: GazeGeometry<f64>,
    /// Observation time after the robot stops (s).
    pub post_handover_window: f64,
    /// Frequency of the vertical gaze wander (Hz).
    pub wander_frequency: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            attention: AttentionParams::default(),
            gaze: GazeGeometry::default(),
            post_handover_window: 2.0,
            wander_frequency: 0.5,
        }
    }
}

/// Raw per-sample signals of one episode, replayable for offline scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub timestamps: Vec<f64>,
    pub gaze_offsets: Vec<SphericalOffset<f64>>,
    /// Joint angles per sample, flattened joint by joint.
    pub angles: Vec<Vec<f64>>,
}

impl EpisodeTrace {
    /// Writes `t, theta, phi, d, q_<joint>_<dof>..` rows.
    pub fn write_csv<W: std::io::Write>(&self, body: &HumanBodyModel<f64>, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["t", "theta", "phi", "d"].iter().map(|s| s.to_string()).collect();
        for joint in &body.joints {
            header.extend((0..joint.dof_count()).map(|k| format!("q_{}_{k}", joint.name)));
        }
        w.write_record(&header)?;
        for ((t, g), q) in self.timestamps.iter().zip(&self.gaze_offsets).zip(&self.angles) {
            let mut row = vec![t.to_string(), g.azimuth.to_string(), g.elevation.to_string(), g.radial.to_string()];
            row.extend(q.iter().map(ToString::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut trace = EpisodeTrace { timestamps: vec![], gaze_offsets: vec![], angles: vec![] };
        for record in r.records() {
            let record = record?;
            let values = record
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::IncompleteLog(format!("bad trace value {f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if values.len() < 4 {
                return Err(Error::IncompleteLog("trace rows need t, theta, phi, d".into()));
            }
            trace.timestamps.push(values[0]);
            trace.gaze_offsets.push(SphericalOffset { azimuth: values[1], elevation: values[2], radial: values[3] });
            trace.angles.push(values[4..].to_vec());
        }
        Ok(trace)
    }

    /// Recomputes the attention and posture series from the raw signals.
    pub fn rescore(
        &self,
        body: &HumanBodyModel<f64>,
        params: &AttentionParams<f64>,
    ) -> Result<(AttentionSeries<f64>, PostureSeries<f64>)> {
        let levels = self.gaze_offsets.iter().map(|g| attention_level(g, params)).collect::<Result<Vec<_>>>()?;
        let mut model = body.clone();
        let mut scores = Vec::with_capacity(self.angles.len());
        for q in &self.angles {
            let mut offset = 0;
            for (j, joint) in body.joints.iter().enumerate() {
                let n = joint.dof_count();
                let slice = q
                    .get(offset..offset + n)
                    .ok_or_else(|| Error::IncompleteLog("trace row has too few joint angles".into()))?;
                model.ingest_angles(j, slice, 0.0)?;
                offset += n;
            }
            scores.push(posture_score(&model));
        }
        Ok((
            AttentionSeries::new(self.timestamps.clone(), levels)?,
            PostureSeries::new(self.timestamps.clone(), scores)?,
        ))
    }
}

/// Scored episode: what the learner observes plus its decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub observation: EpisodeObservation<f64>,
    pub breakdown: CoefficiencyBreakdown<f64>,
    /// Reward handed to the learner (total plus observation noise).
    pub reward: f64,
}

/// Simulated handover environment for one subject.
///
/// All grid trajectories are planned up front; the largest energy among them
/// is the normalization constant.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub grid: ArmGrid<f64>,
    pub robot: RobotModel<f64>,
    pub scene: SceneConfig<f64>,
    pub profile: HumanProfile,
    pub settings: SimulationSettings,
    pub weights: CoefficiencyWeights<f64>,
    arms: Vec<ArmSpec<f64>>,
    trajectories: Vec<Arc<RobotTrajectory<f64>>>,
    energies: Vec<f64>,
    norm: EnergyNormalization<f64>,
    max_mismatch: f64,
    shoulder: Vec3<f64>,
    preferred_elbow: f64,
}

impl Simulator {
    pub fn new(
        grid: ArmGrid<f64>,
        robot: RobotModel<f64>,
        scene: SceneConfig<f64>,
        profile: HumanProfile,
        settings: SimulationSettings,
        weights: CoefficiencyWeights<f64>,
    ) -> Result<Self> {
        grid.validate()?;
        profile.validate(&grid)?;
        weights.validate()?;
        AttentionParams::new(settings.attention.object_radius, settings.attention.smoothing)?;
        if !(settings.post_handover_window >= 0.0) || !(settings.wander_frequency >= 0.0) {
            return Err(Error::ConfigInvalid("post-handover window and wander frequency must be nonnegative".into()));
        }
        let arms = grid.arms();
        let trajectories =
            arms.iter().map(|a| plan_trajectory(a, &robot, &scene).map(Arc::new)).collect::<Result<Vec<_>>>()?;
        let energies = trajectories.iter().map(|t| energy(t)).collect::<Result<Vec<_>>>()?;
        let norm = EnergyNormalization::from_energies(&energies)?;
        let max_mismatch = arms.iter().map(|a| profile.mismatch(a)).fold(0.0, f64::max);

        let r = &profile.reach;
        let shoulder_forward = match r.shoulder_forward {
            Some(f) => f,
            None => {
                let elbow_mid = profile.body.joints[0].ranges[0].midpoint();
                let reach_sq =
                    r.upper_arm.powi(2) + r.forearm.powi(2) + 2.0 * r.upper_arm * r.forearm * elbow_mid.cos();
                let forward_sq = reach_sq - r.shoulder_left.powi(2) - r.shoulder_up.powi(2);
                if forward_sq <= 0.0 {
                    return Err(Error::UnreachableHandover("cannot seat the subject for a mid-range elbow".into()));
                }
                // never so far back that the farthest grid handover is out of reach
                let farthest = grid.distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let max_reach = r.upper_arm + r.forearm - REACH_MARGIN;
                let reach_forward_sq = max_reach * max_reach - r.shoulder_left.powi(2) - r.shoulder_up.powi(2);
                let comfortable = profile.preferred_distance - forward_sq.sqrt();
                if reach_forward_sq > 0.0 {
                    comfortable.max(farthest - reach_forward_sq.sqrt())
                } else {
                    comfortable
                }
            }
        };
        let shoulder = [shoulder_forward, r.shoulder_left, r.shoulder_up];
        let mut sim = Self {
            grid,
            robot,
            scene,
            profile,
            settings,
            weights,
            arms,
            trajectories,
            energies,
            norm,
            max_mismatch,
            shoulder,
            preferred_elbow: 0.0,
        };
        sim.preferred_elbow = sim.elbow_flexion(sim.profile.preferred_distance)?;
        if sim.profile.posture_response != Response::Pinned {
            for a in &sim.arms {
                sim.elbow_flexion(a.distance)?;
            }
        }
        Ok(sim)
    }

    pub fn arms(&self) -> &[ArmSpec<f64>] {
        &self.arms
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn normalization(&self) -> EnergyNormalization<f64> {
        self.norm
    }

    pub fn trajectory(&self, arm: usize) -> &RobotTrajectory<f64> {
        &self.trajectories[arm]
    }

    /// Arm of the grid closest to the subject's stated preference.
    pub fn preferred_arm(&self) -> ArmSpec<f64> {
        let p = self.profile.preference();
        self.grid.nearest_arm(p[0], p[1], p[2])
    }

    fn facing(&self) -> (Vec3<f64>, Vec3<f64>) {
        let yaw = self.scene.human_yaw + PI;
        ([yaw.cos(), yaw.sin(), 0.0], [-yaw.sin(), yaw.cos(), 0.0])
    }

    /// Maps a (forward, left, up) offset from the chest reference into the robot base frame.
    fn human_point(&self, local: Vec3<f64>) -> Vec3<f64> {
        let (fwd, left) = self.facing();
        let c = self.scene.human_reference();
        add(add(add(c, scale(fwd, local[0])), scale(left, local[1])), [0.0, 0.0, local[2]])
    }

    fn elbow_flexion(&self, distance: f64) -> Result<f64> {
        let r = &self.profile.reach;
        let reach = norm(sub([distance, 0.0, 0.0], self.shoulder));
        if reach > r.upper_arm + r.forearm || reach < (r.upper_arm - r.forearm).abs() {
            return Err(Error::UnreachableHandover(format!(
                "handover at {distance} m is {reach} m from the shoulder, arm segments {} + {}",
                r.upper_arm, r.forearm
            )));
        }
        let cos_inner = (r.upper_arm.powi(2) + r.forearm.powi(2) - reach * reach) / (2.0 * r.upper_arm * r.forearm);
        Ok(PI - cos_inner.clamp(-1.0, 1.0).acos())
    }

    /// Elbow flexion, wrist flexion and wrist deviation when taking the object.
    pub fn handover_posture(&self, arm: &ArmSpec<f64>) -> Result<[f64; 3]> {
        let (orientation, distance) = match self.profile.posture_response {
            Response::Pinned => (self.profile.preferred_orientation, self.profile.preferred_distance),
            _ => (arm.orientation, arm.distance),
        };
        let body = &self.profile.body;
        let elbow = self.elbow_flexion(distance)?;
        let wrist = &body.joints[1].ranges;
        let r = &self.profile.reach;
        Ok([
            elbow,
            wrist[0].midpoint() + r.wrist_flexion_coupling * (elbow - self.preferred_elbow),
            wrist[1].midpoint() + r.wrist_deviation_gain * (orientation - self.profile.preferred_orientation),
        ])
    }

    fn effective_mismatch(&self, response: Response, arm: &ArmSpec<f64>) -> f64 {
        match response {
            Response::Responsive => self.profile.mismatch(arm),
            Response::Contrarian => self.max_mismatch - self.profile.mismatch(arm),
            Response::Pinned => 0.0,
        }
    }

    pub fn simulate_episode<R: Rng + ?Sized>(
        &self,
        arm: &ArmSpec<f64>,
        rng: &mut R,
    ) -> Result<EpisodeObservation<f64>> {
        self.simulate_traced(arm, rng).map(|(obs, _)| obs)
    }

    /// Simulates one handover and returns the observation with its raw trace.
    pub fn simulate_traced<R: Rng + ?Sized>(
        &self,
        arm: &ArmSpec<f64>,
        rng: &mut R,
    ) -> Result<(EpisodeObservation<f64>, EpisodeTrace)> {
        if !self.grid.contains(arm) {
            return Err(Error::InvalidArm(format!("arm {} is not part of the grid", arm.index)));
        }
        let p = &self.profile;
        let traj = &self.trajectories[arm.index];
        let duration = traj.duration;
        let gauss = |sigma: f64| Normal::new(0.0, sigma).map_err(|e| Error::ConfigInvalid(e.to_string()));
        let reaction_noise = gauss(p.reaction_noise)?.sample(rng);
        let attention_noise = gauss(p.attention_noise)?.sample(rng);

        // reaction
        let latency =
            (p.baseline_reaction + self.effective_mismatch(p.reaction_response, arm) + reaction_noise).clamp(0.0, 1.0);
        let human_start = latency * duration;
        let reaction = reaction_time(&ReactionObservation { robot_start: 0.0, human_start, robot_duration: duration })?;

        // timeline: trajectory samples, then the post-handover window at the same rate
        let rate = self.scene.sample_rate;
        let extra = (self.settings.post_handover_window * rate).round() as usize;
        let timestamps: Vec<f64> =
            traj.samples.iter().map(|s| s.time).chain((1..=extra).map(|j| duration + j as f64 / rate)).collect();

        // attention through the gaze pipeline
        let attention_mismatch = self.effective_mismatch(p.attention_response, arm);
        let (target_level, wander_gain) = match p.attention_response {
            Response::Pinned => (1.0, 0.0),
            _ => ((p.baseline_attention - attention_mismatch + attention_noise).clamp(0.0, 1.0), attention_mismatch),
        };
        let (fwd, _) = self.facing();
        let facing = Quat::from_yaw(fwd[1].atan2(fwd[0]));
        let head_position = self.human_point(p.head_offset);
        let gaze_origin = add(head_position, facing.rotate(self.settings.gaze.center_offset));
        let tilt_inv = Quat::from_pitch(self.settings.gaze.pitch_down).conjugate();
        let handover_object = self.scene.reach.end_effector(traj.final_configuration());

        let mut gaze_offsets = Vec::with_capacity(timestamps.len());
        let mut levels = Vec::with_capacity(timestamps.len());
        for (k, &t) in timestamps.iter().enumerate() {
            let object = match traj.samples.get(k) {
                Some(s) => self.scene.reach.end_effector(&s.q),
                None => handover_object,
            };
            let to_object = sub(object, gaze_origin);
            let d = norm(to_object);
            let (lo, hi) = attention_limits(d, &self.settings.attention)?;
            let azimuth = if target_level >= 1.0 {
                0.0
            } else if target_level <= 0.0 {
                (1.5 * hi).min(PI)
            } else {
                lo + (hi - lo) * (2.0 * target_level - 1.0).acos() / PI
            };
            let elevation = wander_gain * hi * (2.0 * PI * self.settings.wander_frequency * t).sin();
            let gaze_orientation = look_at_with_offset(to_object, azimuth, elevation.clamp(-1.5, 1.5));
            let head_orientation = gaze_orientation.mul(&tilt_inv);
            let head = Pose::new(
                sub(gaze_origin, head_orientation.rotate(self.settings.gaze.center_offset)),
                head_orientation,
            );
            let gaze = gaze_frame(&head, &self.settings.gaze);
            let offset = relative_spherical(&gaze, object)?;
            levels.push(attention_level(&offset, &self.settings.attention)?);
            gaze_offsets.push(offset);
        }

        // posture: rest until motion onset, reach with a minimum-jerk profile, then hold
        let target = self.handover_posture(arm)?;
        let mut body = p.body.clone();
        let rest: Vec<Vec<f64>> = body.joints.iter().map(|j| j.angles.clone()).collect();
        let posture_noise = gauss(p.posture_noise)?;
        let mut scores = Vec::with_capacity(timestamps.len());
        let mut angles = Vec::with_capacity(timestamps.len());
        let reach_time = duration - human_start;
        for &t in &timestamps {
            let phase = if t <= human_start {
                0.0
            } else if reach_time <= 1e-9 || t >= duration {
                1.0
            } else {
                minimum_jerk((t - human_start) / reach_time, reach_time).0
            };
            let mut flat = Vec::new();
            for (j, rest_angles) in rest.iter().enumerate() {
                let mut q = rest_angles.clone();
                let moving: &[(usize, f64)] = match j {
                    0 => &[(0, target[0])],
                    1 => &[(0, target[1]), (1, target[2])],
                    _ => &[],
                };
                for &(dof, goal) in moving {
                    q[dof] += phase * (goal - q[dof]);
                }
                if p.posture_noise > 0.0 {
                    for v in &mut q {
                        *v += posture_noise.sample(rng);
                    }
                }
                body.ingest_angles(j, &q, 0.0)?;
                flat.extend_from_slice(&body.joints[j].angles);
            }
            scores.push(posture_score(&body));
            angles.push(flat);
        }

        let observation = EpisodeObservation {
            reaction,
            attention: AttentionSeries::new(timestamps.clone(), levels)?,
            posture: PostureSeries::new(timestamps.clone(), scores)?,
            energy: self.energies[arm.index],
            trajectory: Some(Arc::clone(traj)),
        };
        Ok((observation, EpisodeTrace { timestamps, gaze_offsets, angles }))
    }

    pub fn score(&self, observation: &EpisodeObservation<f64>) -> Result<CoefficiencyBreakdown<f64>> {
        evaluate_episode(observation, &self.norm, &self.weights)
    }

    /// Simulates, scores and perturbs the score with the subject's reward noise.
    pub fn run_episode<R: Rng + ?Sized>(&self, arm: &ArmSpec<f64>, rng: &mut R) -> Result<EpisodeOutcome> {
        let observation = self.simulate_episode(arm, rng)?;
        let breakdown = self.score(&observation)?;
        let noise = if self.profile.reward_noise > 0.0 {
            Normal::new(0.0, self.profile.reward_noise).map_err(|e| Error::ConfigInvalid(e.to_string()))?.sample(rng)
        } else {
            0.0
        };
        let reward = (breakdown.total + noise).clamp(0.0, 1.0);
        Ok(EpisodeOutcome { observation, breakdown, reward })
    }

    /// Expected score per arm: a single evaluation when the subject is
    /// noiseless, otherwise a Monte-Carlo average over `n_samples` episodes.
    ///
    /// Additive reward noise is zero-mean and is not sampled.
    pub fn true_arm_means<R: Rng + ?Sized>(&self, n_samples: usize, rng: &mut R) -> Result<Vec<f64>> {
        let samples = if self.profile.is_noiseless() { 1 } else { n_samples.max(1) };
        self.arms
            .iter()
            .map(|arm| {
                let mut total = 0.0;
                for _ in 0..samples {
                    total += self.score(&self.simulate_episode(arm, rng)?)?.total;
                }
                Ok(total / samples as f64)
            })
            .collect()
    }

    /// Per-arm breakdowns with every noise source disabled.
    pub fn noiseless_breakdowns(&self) -> Result<Vec<CoefficiencyBreakdown<f64>>> {
        let quiet = Self { profile: self.profile.noiseless(), ..self.clone() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        quiet.arms.iter().map(|a| quiet.score(&quiet.simulate_episode(a, &mut rng)?)).collect()
    }
}

/// Orientation whose forward axis sees `direction` at the given azimuth and
/// elevation.
fn look_at_with_offset(direction: Vec3<f64>, azimuth: f64, elevation: f64) -> Quat<f64> {
    let yaw = direction[1].atan2(direction[0]);
    let pitch = direction[2].atan2(direction[0].hypot(direction[1]));
    let to_object = Quat::from_yaw(yaw).mul(&Quat::from_pitch(-pitch));
    let offset = Quat::from_yaw(azimuth).mul(&Quat::from_pitch(-elevation));
    to_object.mul(&offset.conjugate())
}
