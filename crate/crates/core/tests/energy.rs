use approx::assert_relative_eq;
use coefficiency_core::robot::{compute_torques, energy, minimum_jerk_trajectory, RobotModel, RobotTrajectory};

const INERTIA: f64 = 0.8;
const STROKE: f64 = 1.2;

fn single_joint(duration: f64, rate: f64) -> RobotTrajectory<f64> {
    let traj = minimum_jerk_trajectory(&[0.0], None, &[STROKE], duration, rate).unwrap();
    compute_torques(traj, &RobotModel::single_joint(INERTIA))
}

/// Power of the frictionless minimum-jerk move from its analytic derivatives.
fn analytic_power(t: f64, duration: f64) -> f64 {
    let u = t / duration;
    let v = STROKE / duration * 30.0 * u * u * (1.0 - u) * (1.0 - u);
    let a = STROKE / (duration * duration) * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
    (INERTIA * a * v).abs()
}

/// Composite Simpson quadrature of the analytic power at 10 kHz.
fn quadrature_energy(duration: f64) -> f64 {
    let n = (duration * 10_000.0).round() as usize;
    let n = n + n % 2;
    let h = duration / n as f64;
    let inner: f64 = (1..n).map(|i| analytic_power(i as f64 * h, duration) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    h / 3.0 * (analytic_power(0.0, duration) + inner + analytic_power(duration, duration))
}

#[test]
fn quadrature_oracle_matches_closed_form() {
    // integral of 1800 u^3 (1-u)^3 |1-2u| over [0, 1] is 1800 / 512
    for duration in [2.0, 5.0, 8.0] {
        let closed = 1800.0 / 512.0 * INERTIA * STROKE * STROKE / (duration * duration);
        assert_relative_eq!(quadrature_energy(duration), closed, max_relative = 1e-6);
    }
}

#[test]
fn trapezoid_energy_matches_quadrature() {
    for duration in [2.0, 5.0, 8.0] {
        for rate in [100.0, 1000.0] {
            let e = energy(&single_joint(duration, rate)).unwrap();
            let oracle = quadrature_energy(duration);
            assert!((e - oracle).abs() / oracle < 1e-3, "T={duration} rate={rate}: {e} vs {oracle}");
        }
    }
}

#[test]
fn doubling_duration_quarters_energy() {
    for duration in [2.5, 4.0] {
        let ratio =
            energy(&single_joint(duration, 100.0)).unwrap() / energy(&single_joint(2.0 * duration, 100.0)).unwrap();
        assert!((ratio - 4.0).abs() <= 0.04, "ratio {ratio}");
    }
}

#[test]
fn sample_rate_refinement_converges() {
    let coarse = energy(&single_joint(5.0, 100.0)).unwrap();
    let fine = energy(&single_joint(5.0, 1000.0)).unwrap();
    assert!((coarse - fine).abs() / fine < 5e-3);
}

#[test]
fn peak_power_scales_with_cube_of_time() {
    let k = 1.6;
    let fast = single_joint(5.0, 1000.0);
    let slow = single_joint(5.0 * k, 1000.0);
    assert_relative_eq!(fast.peak_power() / slow.peak_power(), k.powi(3), max_relative = 1e-2);
    assert_relative_eq!(energy(&fast).unwrap() / energy(&slow).unwrap(), k * k, max_relative = 1e-2);
}

#[test]
fn single_precision_agrees() {
    let t32 = minimum_jerk_trajectory(&[0.0f32], None, &[STROKE as f32], 5.0, 100.0).unwrap();
    let e32 = energy(&compute_torques(t32, &RobotModel::single_joint(INERTIA as f32))).unwrap();
    let e64 = energy(&single_joint(5.0, 100.0)).unwrap();
    assert!((e32 as f64 - e64).abs() / e64 < 1e-4);
}
