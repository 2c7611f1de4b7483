//! TOML experiment configuration.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bandit::ArmGrid;
use crate::coefficiency::CoefficiencyWeights;
use crate::error::{Error, Result};
use crate::robot::{RobotModel, SceneConfig};
use crate::simulator::{
    run_experiment, BanditSettings, ExperimentOutcome, HumanProfile, Response, SimulationSettings, Simulator,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Profile preset plus optional per-field overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub preset: Option<String>,
    pub preferred_orientation: Option<f64>,
    pub preferred_distance: Option<f64>,
    pub preferred_duration: Option<f64>,
    pub sensitivity_orientation: Option<f64>,
    pub sensitivity_distance: Option<f64>,
    pub sensitivity_duration: Option<f64>,
    pub baseline_attention: Option<f64>,
    pub baseline_reaction: Option<f64>,
    pub attention_noise: Option<f64>,
    pub reaction_noise: Option<f64>,
    pub posture_noise: Option<f64>,
    pub reward_noise: Option<f64>,
    pub attention_response: Option<Response>,
    pub reaction_response: Option<Response>,
    pub posture_response: Option<Response>,
}

impl ProfileConfig {
    fn apply(&self, mut p: HumanProfile) -> HumanProfile {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { p.$field = v; } )* };
        }
        set!(
            preferred_orientation,
            preferred_distance,
            preferred_duration,
            sensitivity_orientation,
            sensitivity_distance,
            sensitivity_duration,
            baseline_attention,
            baseline_reaction,
            attention_noise,
            reaction_noise,
            posture_noise,
            reward_noise,
            attention_response,
            reaction_response,
            posture_response
        );
        p
    }
}

/// Ground-truth estimation of per-arm means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Monte-Carlo episodes per arm for noisy subjects.
    pub samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { samples: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub profiles: Vec<String>,
    /// Seeds `0..seeds` are run for every profile.
    pub seeds: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { profiles: vec!["default".into()], seeds: 10, jobs: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub output_dir: String,
    pub grid: ArmGrid<f64>,
    pub bandit: BanditSettings,
    pub weights: CoefficiencyWeights<f64>,
    pub robot: RobotModel<f64>,
    pub scene: SceneConfig<f64>,
    pub simulation: SimulationSettings,
    pub profile: ProfileConfig,
    pub oracle: OracleConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            output_dir: "runs".into(),
            grid: ArmGrid::default(),
            bandit: BanditSettings::default(),
            weights: CoefficiencyWeights::default(),
            robot: RobotModel::seven_dof_default(),
            scene: SceneConfig::seven_dof_default(),
            simulation: SimulationSettings::default(),
            profile: ProfileConfig { preset: Some("default".into()), ..ProfileConfig::default() },
            oracle: OracleConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Checks everything that can be checked without planning trajectories.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::ConfigInvalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.grid.validate()?;
        self.bandit.validate(self.grid.len())?;
        self.weights.validate()?;
        self.robot.validate()?;
        if !(self.scene.sample_rate > 0.0) {
            return Err(Error::ConfigInvalid("scene.sample_rate must be positive".into()));
        }
        if self.scene.grasp_configuration.len() != self.robot.joint_count() {
            return Err(Error::ConfigInvalid(format!(
                "scene.grasp_configuration has {} joints, robot has {}",
                self.scene.grasp_configuration.len(),
                self.robot.joint_count()
            )));
        }
        self.profile(None)?.validate(&self.grid)?;
        for name in &self.sweep.profiles {
            self.profile(Some(name))?.validate(&self.grid)?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Resolves a profile preset (the configured one when `name` is `None`)
    /// and applies the configured overrides.
    pub fn profile(&self, name: Option<&str>) -> Result<HumanProfile> {
        let name = name.or(self.profile.preset.as_deref()).unwrap_or("default");
        Ok(self.profile.apply(HumanProfile::preset(name, &self.grid)?))
    }

    pub fn simulator(&self, profile: HumanProfile) -> Result<Simulator> {
        Simulator::new(
            self.grid.clone(),
            self.robot.clone(),
            self.scene.clone(),
            profile,
            self.simulation.clone(),
            self.weights,
        )
    }

    /// Per-arm expected scores, drawn from the oracle seed so they do not
    /// depend on the run seed.
    pub fn true_means(&self, sim: &Simulator) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.oracle.seed);
        sim.true_arm_means(self.oracle.samples, &mut rng)
    }

    /// Runs one experiment and stamps the log with this configuration.
    pub fn run(&self, sim: &Simulator, true_means: &[f64], seed: u64) -> Result<ExperimentOutcome> {
        let mut out = run_experiment(sim, &self.bandit, seed, true_means)?;
        out.log.meta.config_hash = self.hash();
        out.log.meta.config = Some(serde_json::to_value(self)?);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml_str("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("schema_version = 2").is_err());
        assert!(ExperimentConfig::from_toml_str("[bandit]\nexploration = 0.1\nhorizon = 5\nwindow = 3\nstreak = 5")
            .is_err());
        assert!(ExperimentConfig::from_toml_str("[weights]\ncognitive = 0.5\nphysical = 0.5\nenergy = 0.5").is_err());
        assert!(ExperimentConfig::from_toml_str("[profile]\npreset = \"nobody\"").is_err());
    }

    #[test]
    fn overrides_apply_on_top_of_the_preset() {
        let cfg = ExperimentConfig::from_toml_str("[profile]\npreset = \"contrarian\"\nreward_noise = 0.02").unwrap();
        let p = cfg.profile(None).unwrap();
        assert_eq!(p.name, "contrarian");
        assert_eq!(p.reward_noise, 0.02);
        assert_eq!(cfg.profile(Some("default")).unwrap().reward_noise, 0.02);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { seed: 1, ..a.clone() };
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
