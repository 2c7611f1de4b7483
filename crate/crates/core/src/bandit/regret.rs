use super::policy::Selection;
use crate::scalar::Real;

/// Cumulative pseudo-regret: after each step, the summed gap between the best
/// true arm mean and the true mean of the arm actually pulled.
pub fn cumulative_regret<T: Real>(history: &[Selection<T>], true_means: &[T]) -> Vec<T> {
    let best = true_means.iter().copied().fold(T::neg_infinity(), T::max);
    history
        .iter()
        .scan(T::zero(), |acc, s| {
            *acc = *acc + (best - true_means[s.arm]).max(T::zero());
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hist(arms: &[usize]) -> Vec<Selection<f64>> {
        arms.iter().enumerate().map(|(i, &arm)| Selection { t: i + 1, arm, reward: 0.5 }).collect()
    }

    #[test]
    fn best_arm_only_has_zero_regret() {
        assert!(cumulative_regret(&hist(&[1, 1, 1]), &[0.2, 0.8]).iter().all(|r| *r == 0.0));
    }

    #[test]
    fn priming_round_regret() {
        let r = cumulative_regret(&hist(&[0, 1]), &[0.5, 0.9]);
        assert!((r[1] - 0.4).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn regret_is_nondecreasing(arms in prop::collection::vec(0usize..4, 0..100), means in prop::collection::vec(0.0..1.0f64, 4)) {
            let r = cumulative_regret(&hist(&arms), &means);
            prop_assert_eq!(r.len(), arms.len());
            prop_assert!(r.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(r.iter().all(|x| *x >= 0.0));
        }
    }
}
