use coefficiency_core::bandit::{argmax, Parameter};
use coefficiency_core::body::validate_rom;
use coefficiency_core::config::ExperimentConfig;
use coefficiency_core::simulator::{EpisodeTrace, HumanProfile, RunLog, Simulator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sim(profile: HumanProfile) -> Simulator {
    ExperimentConfig::default().simulator(profile).unwrap()
}

fn noiseless_default() -> Simulator {
    sim(HumanProfile::default().noiseless())
}

#[test]
fn preferred_arm_reproduces_baselines() {
    let s = noiseless_default();
    let pref = s.preferred_arm();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let obs = s.simulate_episode(&pref, &mut rng).unwrap();
    assert!((obs.reaction - s.profile.baseline_reaction).abs() < 1e-12);
    assert!((obs.attention.mean().unwrap() - s.profile.baseline_attention).abs() < 1e-9);
    let physical: Vec<f64> = s.noiseless_breakdowns().unwrap().iter().map(|b| b.physical).collect();
    let best = physical.iter().copied().fold(f64::MIN, f64::max);
    assert_eq!(physical[pref.index], best);
}

#[test]
fn default_oracle_best_is_the_preferred_arm() {
    let cfg = ExperimentConfig::default();
    let s = cfg.simulator(cfg.profile(None).unwrap()).unwrap();
    let means = cfg.true_means(&s).unwrap();
    assert_eq!(argmax(&means), s.preferred_arm().index);
    let mut sorted = means.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!(sorted[0] - sorted[1] >= 0.05, "gap {}", sorted[0] - sorted[1]);
    let exact: Vec<f64> = s.noiseless_breakdowns().unwrap().iter().map(|b| b.total).collect();
    assert_eq!(means, exact);
}

#[test]
fn closer_arm_never_scores_lower() {
    let s = noiseless_default();
    let totals: Vec<f64> = s.noiseless_breakdowns().unwrap().iter().map(|b| b.total).collect();
    let pref = s.profile.preference();
    let arms = s.arms();
    for a in arms {
        for b in arms {
            let differing: Vec<Parameter> = Parameter::ALL.into_iter().filter(|&p| a.level(p) != b.level(p)).collect();
            if let [p] = differing[..] {
                let target = pref[p.slot()];
                if (a.value(p) - target).abs() < (b.value(p) - target).abs() {
                    assert!(totals[a.index] >= totals[b.index], "arm {} vs {}", a.index, b.index);
                }
            }
        }
    }
}

#[test]
fn farthest_arm_scores_strictly_lower() {
    let s = noiseless_default();
    let totals: Vec<f64> = s.noiseless_breakdowns().unwrap().iter().map(|b| b.total).collect();
    let pref = s.preferred_arm();
    let far = s.arms().iter().max_by(|a, b| s.profile.mismatch(a).total_cmp(&s.profile.mismatch(b))).unwrap();
    assert!(totals[far.index] < totals[pref.index]);
}

#[test]
fn distance_sensitivity_widens_the_distance_gap() {
    let gap = |kappa: f64| {
        let s = sim(HumanProfile { sensitivity_distance: kappa, ..HumanProfile::default() }.noiseless());
        let totals: Vec<f64> = s.noiseless_breakdowns().unwrap().iter().map(|b| b.total).collect();
        let pref = s.preferred_arm();
        let other = s.arms().iter().find(|a| a.levels == [pref.levels[0], 1 - pref.levels[1], pref.levels[2]]).unwrap();
        totals[pref.index] - totals[other.index]
    };
    let gaps: Vec<f64> = [0.1, 0.3, 0.6].iter().map(|&k| gap(k)).collect();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
}

#[test]
fn episodes_are_deterministic_per_seed() {
    let s = sim(HumanProfile::cohort_member(3, &ExperimentConfig::default().grid));
    let arm = s.arms()[3];
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        serde_json::to_string(&s.simulate_episode(&arm, &mut rng).unwrap()).unwrap()
    };
    assert_eq!(run(42), run(42));
    assert_ne!(run(42), run(43));
}

#[test]
fn synthesized_angles_respect_ranges() {
    let s = sim(HumanProfile::cohort_member(5, &ExperimentConfig::default().grid));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for arm in s.arms() {
        let (obs, trace) = s.simulate_traced(arm, &mut rng).unwrap();
        assert_eq!(trace.timestamps.len(), obs.attention.levels.len());
        let last = *trace.timestamps.last().unwrap();
        assert!((last - (arm.duration + s.settings.post_handover_window)).abs() < 1e-9);
        let mut body = s.profile.body.clone();
        for q in &trace.angles {
            body.ingest_angles(0, &q[..1], 0.0).unwrap();
            body.ingest_angles(1, &q[1..3], 0.0).unwrap();
            assert!(validate_rom(&body, 0.0).is_empty());
        }
    }
}

#[test]
fn trace_round_trips_and_rescores() {
    let s = sim(HumanProfile::cohort_member(1, &ExperimentConfig::default().grid));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (obs, trace) = s.simulate_traced(&s.arms()[4], &mut rng).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&s.profile.body, &mut buf).unwrap();
    let back = EpisodeTrace::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, trace);
    let (attention, posture) = back.rescore(&s.profile.body, &s.settings.attention).unwrap();
    for (a, b) in attention.levels.iter().zip(&obs.attention.levels) {
        assert!((a - b).abs() < 1e-9);
    }
    for (a, b) in posture.scores.iter().zip(&obs.posture.scores) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn run_log_round_trips_through_disk() {
    let cfg = ExperimentConfig::default();
    let s = cfg.simulator(cfg.profile(None).unwrap()).unwrap();
    let means = cfg.true_means(&s).unwrap();
    let out = cfg.run(&s, &means, 11).unwrap();
    let log = &out.log;
    assert_eq!(log.steps.len(), 50);
    let mut first: Vec<usize> = log.steps[..12].iter().map(|r| r.arm).collect();
    first.sort();
    assert_eq!(first, (0..12).collect::<Vec<_>>());
    assert_eq!(log.meta.config_hash, cfg.hash());
    assert!(log.steps[0].q_values.iter().all(Option::is_none));

    let dir = tempfile::tempdir().unwrap();
    log.write_dir(dir.path()).unwrap();
    let back = RunLog::read_dir(dir.path()).unwrap();
    assert_eq!(&back, log);
    std::fs::remove_file(dir.path().join("regret.csv")).unwrap();
    assert!(RunLog::read_dir(dir.path()).is_err());
}

#[test]
fn unreachable_handover_is_reported() {
    let mut profile = HumanProfile::default();
    profile.reach.shoulder_forward = Some(-0.5);
    let err = ExperimentConfig::default().simulator(profile).unwrap_err();
    assert!(err.to_string().contains("handover"), "{err}");
}
