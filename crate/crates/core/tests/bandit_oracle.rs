use coefficiency_core::bandit::{cumulative_regret, ArmGrid, BanditState, VarianceMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// UCB1-tuned index recomputed from scratch out of the raw reward history.
fn brute_force_q(histories: &[Vec<f64>], t: usize, c: f64, mode: VarianceMode) -> Vec<f64> {
    histories
        .iter()
        .map(|h| {
            if h.is_empty() {
                return f64::INFINITY;
            }
            let n = h.len() as f64;
            let mean = h.iter().sum::<f64>() / n;
            let second = match mode {
                VarianceMode::SquaredRewards => h.iter().map(|r| r * r).sum::<f64>() / n,
                VarianceMode::RunningMeans => {
                    (1..=h.len())
                        .map(|k| {
                            let m = h[..k].iter().sum::<f64>() / k as f64;
                            m * m
                        })
                        .sum::<f64>()
                        / n
                }
            };
            let ln_t = (t.max(1) as f64).ln();
            let v = (second - mean * mean).max(0.0) + (2.0 * ln_t / n).sqrt();
            mean + c * (ln_t / n * v.min(0.25)).sqrt()
        })
        .collect()
}

fn first_max(q: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..q.len() {
        if q[i] > q[best] {
            best = i;
        }
    }
    best
}

fn replay(steps: usize, seed: u64, mode: VarianceMode) {
    let c = 0.1;
    let arms = ArmGrid::<f64>::default().arms();
    let k = arms.len();
    let mut state = BanditState::new(arms, c, mode).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..0.8)).collect();
    let mut histories = vec![Vec::new(); k];
    for _ in 0..steps {
        let oracle_q = brute_force_q(&histories, state.step, c, mode);
        for (a, b) in state.q_values().iter().zip(&oracle_q) {
            assert!(a == b || (a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let arm = state.select_action().index;
        assert_eq!(arm, first_max(&oracle_q));
        let reward = (means[arm] + rng.random_range(-0.2..0.2)).clamp(0.0, 1.0);
        state.record(arm, reward).unwrap();
        histories[arm].push(reward);
        let batch_mean = histories[arm].iter().sum::<f64>() / histories[arm].len() as f64;
        assert!((state.stats[arm].mean - batch_mean).abs() < 1e-12);
    }
}

#[test]
fn replay_matches_brute_force_squared_rewards() {
    replay(1000, 3, VarianceMode::SquaredRewards);
}

#[test]
fn replay_matches_brute_force_running_means() {
    replay(300, 4, VarianceMode::RunningMeans);
}

#[test]
fn regret_is_sublinear_on_separated_gaussian_arms() {
    let means: [f64; 12] = [0.35, 0.46, 0.38, 0.49, 0.46, 0.57, 0.52, 0.63, 0.35, 0.46, 0.37, 0.49];
    let noise = Normal::new(0.0, 0.02).unwrap();
    let (mut r250, mut r500) = (0.0, 0.0);
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = BanditState::new(ArmGrid::default().arms(), 0.1, VarianceMode::SquaredRewards).unwrap();
        for _ in 0..500 {
            state.step(|a| Ok((means[a.index] + noise.sample(&mut rng)).clamp(0.0, 1.0))).unwrap();
        }
        let regret = cumulative_regret(&state.history, &means);
        r250 += regret[249];
        r500 += regret[499];
    }
    assert!(r500 / r250 < 1.8, "ratio {}", r500 / r250);
}

proptest! {
    #[test]
    fn shifting_every_mean_keeps_the_choice(
        rewards in prop::collection::vec((0usize..12, 0.0..0.6f64), 12..80),
        shift in 0.0..0.4f64,
    ) {
        let arms = ArmGrid::<f64>::default().arms();
        let mut base = BanditState::new(arms.clone(), 0.1, VarianceMode::SquaredRewards).unwrap();
        let mut shifted = BanditState::new(arms, 0.1, VarianceMode::SquaredRewards).unwrap();
        for (arm, r) in rewards {
            base.record(arm, r).unwrap();
            shifted.record(arm, r).unwrap();
        }
        for s in &mut shifted.stats {
            if s.pulls > 0 {
                let n = s.pulls as f64;
                s.sum_sq += 2.0 * shift * s.mean * n + shift * shift * n;
                s.mean += shift;
            }
        }
        prop_assert_eq!(base.select_action().index, shifted.select_action().index);
    }
}
