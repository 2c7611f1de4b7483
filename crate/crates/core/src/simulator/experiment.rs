//! Closed-loop runs of the bandit against a simulated subject, and the
//! on-disk run log.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::episode::Simulator;
use crate::bandit::{argmax, convergence_report, cumulative_regret, BanditState, ConvergenceReport, VarianceMode};
use crate::error::{Error, Result};

/// Learner settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditSettings {
    pub exploration: f64,
    pub horizon: usize,
    /// Selections considered when extracting learned values.
    pub window: usize,
    /// Consecutive selections required for convergence.
    pub streak: usize,
    #[serde(default)]
    pub variance_mode: VarianceMode,
}

impl Default for BanditSettings {
    fn default() -> Self {
        Self { exploration: 0.1, horizon: 50, window: 25, streak: 5, variance_mode: VarianceMode::default() }
    }
}

impl BanditSettings {
    pub fn validate(&self, arm_count: usize) -> Result<()> {
        if !(self.exploration >= 0.0) || !self.exploration.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "exploration constant {} must be finite and nonnegative",
                self.exploration
            )));
        }
        if self.horizon < arm_count {
            return Err(Error::ConfigInvalid(format!(
                "horizon {} is shorter than the {arm_count} priming pulls",
                self.horizon
            )));
        }
        if self.window == 0 || self.window > self.horizon {
            return Err(Error::WindowTooLarge { window: self.window, len: self.horizon });
        }
        if self.streak == 0 {
            return Err(Error::ConfigInvalid("streak must be at least 1".into()));
        }
        Ok(())
    }
}

/// One line of `steps.csv` / `steps.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub arm: usize,
    pub orientation: f64,
    pub distance: f64,
    pub duration: f64,
    pub reward: f64,
    pub cognitive: f64,
    pub physical: f64,
    pub energy_cost: f64,
    pub energy_j: f64,
    pub reaction: f64,
    pub mean_attention: f64,
    /// Per-arm means after the update.
    pub means: Vec<f64>,
    /// Per-arm pull counts after the update.
    pub pulls: Vec<usize>,
    /// Per-arm UCB values at selection time; `None` for unpulled arms.
    pub q_values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub profile: String,
    pub config_hash: String,
    pub e_max: f64,
    pub energies: Vec<f64>,
    pub true_means: Vec<f64>,
    /// Subject's preferred (orientation, distance, duration).
    pub preference: [f64; 3],
    pub preferred_arm: usize,
    /// Arm with the highest true mean.
    pub oracle_best_arm: usize,
    pub bandit: BanditSettings,
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub meta: RunMeta,
    pub steps: Vec<StepRecord>,
    pub regret: Vec<f64>,
    pub convergence: Option<ConvergenceReport<f64>>,
    /// Set when the run stopped early.
    pub failure: Option<String>,
}

pub struct ExperimentOutcome {
    pub log: RunLog,
    pub state: BanditState<f64>,
}

/// Runs priming plus UCB selection for `settings.horizon` iterations.
///
/// Every random draw comes from a ChaCha8 stream seeded by `seed`, so a run is
/// reproducible bit for bit. A simulation error ends the run early; the
/// partial log records the failure.
pub fn run_experiment(
    sim: &Simulator,
    settings: &BanditSettings,
    seed: u64,
    true_means: &[f64],
) -> Result<ExperimentOutcome> {
    let arms = sim.arms().to_vec();
    settings.validate(arms.len())?;
    if true_means.len() != arms.len() {
        return Err(Error::InvalidArm(format!("{} true means for {} arms", true_means.len(), arms.len())));
    }
    let mut state = BanditState::new(arms, settings.exploration, settings.variance_mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::with_capacity(settings.horizon);
    let mut failure = None;

    for _ in 0..settings.horizon {
        let q_values = state.q_values();
        let arm = state.arms[argmax(&q_values)];
        let outcome = match sim.run_episode(&arm, &mut rng) {
            Ok(o) => o,
            Err(e) => {
                failure = Some(format!("iteration {}: {e}", state.step + 1));
                break;
            }
        };
        state.record(arm.index, outcome.reward)?;
        let b = &outcome.breakdown;
        steps.push(StepRecord {
            t: state.step,
            arm: arm.index,
            orientation: arm.orientation,
            distance: arm.distance,
            duration: arm.duration,
            reward: outcome.reward,
            cognitive: b.cognitive,
            physical: b.physical,
            energy_cost: b.energy,
            energy_j: outcome.observation.energy,
            reaction: outcome.observation.reaction,
            mean_attention: outcome.observation.attention.mean().unwrap_or(0.0),
            means: state.means(),
            pulls: state.pulls(),
            q_values: q_values.iter().map(|q| q.is_finite().then_some(*q)).collect(),
        });
    }

    let preference = sim.profile.preference();
    let convergence = (state.history.len() >= settings.window)
        .then(|| convergence_report(&state, settings.window, settings.streak, Some(preference)))
        .transpose()?;
    let meta = RunMeta {
        seed,
        profile: sim.profile.name.clone(),
        config_hash: String::new(),
        e_max: sim.normalization().e_max,
        energies: sim.energies().to_vec(),
        true_means: true_means.to_vec(),
        preference,
        preferred_arm: sim.preferred_arm().index,
        oracle_best_arm: argmax(true_means),
        bandit: settings.clone(),
        config: None,
    };
    let regret = cumulative_regret(&state.history, true_means);
    Ok(ExperimentOutcome { log: RunLog { meta, steps, regret, convergence, failure }, state })
}

const STEPS_CSV: &str = "steps.csv";
const STEPS_JSONL: &str = "steps.jsonl";
const CONVERGENCE: &str = "convergence.json";
const REGRET: &str = "regret.csv";
const META: &str = "meta.json";

impl RunLog {
    pub fn final_regret(&self) -> Option<f64> {
        self.regret.last().copied()
    }

    /// Writes the run directory: steps (CSV and JSON lines), convergence,
    /// regret and metadata.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_steps_csv(File::create(dir.join(STEPS_CSV))?)?;

        let mut jsonl = BufWriter::new(File::create(dir.join(STEPS_JSONL))?);
        for s in &self.steps {
            serde_json::to_writer(&mut jsonl, s)?;
            jsonl.write_all(b"\n")?;
        }
        jsonl.flush()?;

        let conv = serde_json::json!({
            "convergence": self.convergence,
            "failure": self.failure,
        });
        fs::write(dir.join(CONVERGENCE), serde_json::to_string_pretty(&conv)? + "\n")?;

        let mut w = csv::Writer::from_path(dir.join(REGRET))?;
        w.write_record(["t", "arm", "cumulative_regret"])?;
        for (s, r) in self.steps.iter().zip(&self.regret) {
            w.write_record([s.t.to_string(), s.arm.to_string(), r.to_string()])?;
        }
        w.flush()?;

        fs::write(dir.join(META), serde_json::to_string_pretty(&self.meta)? + "\n")?;
        Ok(())
    }

    pub fn write_steps_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.meta.true_means.len();
        let mut header: Vec<String> = [
            "t",
            "arm",
            "orientation",
            "distance",
            "duration",
            "reward",
            "cognitive",
            "physical",
            "energy_cost",
            "energy_j",
            "reaction",
            "mean_attention",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((0..k).map(|i| format!("mean_{i}")));
        header.extend((0..k).map(|i| format!("pulls_{i}")));
        header.extend((0..k).map(|i| format!("q_{i}")));
        w.write_record(&header)?;
        for s in &self.steps {
            let mut row = vec![s.t.to_string(), s.arm.to_string()];
            row.extend(
                [
                    s.orientation,
                    s.distance,
                    s.duration,
                    s.reward,
                    s.cognitive,
                    s.physical,
                    s.energy_cost,
                    s.energy_j,
                    s.reaction,
                    s.mean_attention,
                ]
                .iter()
                .map(ToString::to_string),
            );
            row.extend(s.means.iter().map(ToString::to_string));
            row.extend(s.pulls.iter().map(ToString::to_string));
            row.extend(s.q_values.iter().map(|q| q.map_or_else(|| "inf".to_string(), |v| v.to_string())));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a run directory written by [`RunLog::write_dir`].
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let need = |name: &str| {
            let p = dir.join(name);
            if p.is_file() {
                Ok(p)
            } else {
                Err(Error::IncompleteLog(format!("{} is missing {name}", dir.display())))
            }
        };
        let meta: RunMeta = serde_json::from_str(&fs::read_to_string(need(META)?)?)?;
        let mut steps = Vec::new();
        for line in BufReader::new(File::open(need(STEPS_JSONL)?)?).lines() {
            let line = line?;
            if !line.trim().is_empty() {
                steps.push(serde_json::from_str::<StepRecord>(&line)?);
            }
        }
        #[derive(Deserialize)]
        struct ConvergenceFile {
            convergence: Option<ConvergenceReport<f64>>,
            failure: Option<String>,
        }
        let conv: ConvergenceFile = serde_json::from_str(&fs::read_to_string(need(CONVERGENCE)?)?)?;

        let mut regret = Vec::with_capacity(steps.len());
        let mut r = csv::Reader::from_path(need(REGRET)?)?;
        for record in r.records() {
            let record = record?;
            let v = record
                .get(2)
                .and_then(|f| f.parse::<f64>().ok())
                .ok_or_else(|| Error::IncompleteLog("malformed regret row".into()))?;
            regret.push(v);
        }
        if regret.len() != steps.len() {
            return Err(Error::IncompleteLog(format!("{} regret rows for {} steps", regret.len(), steps.len())));
        }
        Ok(Self { meta, steps, regret, convergence: conv.convergence, failure: conv.failure })
    }
}
