use serde::Serialize;

use crate::{failed, invalid, load_config, CliResult, OracleArgs};

#[derive(Serialize)]
struct OracleRow {
    arm: usize,
    orientation: f64,
    distance: f64,
    duration: f64,
    true_mean: f64,
    energy_j: f64,
}

pub fn oracle(args: &OracleArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let profile = cfg.profile(args.profile.as_deref()).map_err(invalid)?;
    let sim = cfg.simulator(profile).map_err(invalid)?;
    let means = cfg.true_means(&sim).map_err(failed)?;
    let rows: Vec<OracleRow> = sim
        .arms()
        .iter()
        .map(|a| OracleRow {
            arm: a.index,
            orientation: a.orientation,
            distance: a.distance,
            duration: a.duration,
            true_mean: means[a.index],
            energy_j: sim.energies()[a.index],
        })
        .collect();

    let method = if sim.profile.is_noiseless() {
        "exact (noiseless subject)".to_string()
    } else {
        format!("Monte-Carlo, {} episodes per arm", cfg.oracle.samples)
    };
    println!("profile {}  means: {method}", sim.profile.name);
    println!(
        "{:>3} {:>11} {:>8} {:>8} {:>9} {:>9}",
        "arm", "orientation", "distance", "duration", "true_mean", "energy_j"
    );
    for r in &rows {
        println!(
            "{:>3} {:>11.4} {:>8.3} {:>8.1} {:>9.4} {:>9.4}",
            r.arm, r.orientation, r.distance, r.duration, r.true_mean, r.energy_j
        );
    }
    println!(
        "argmax arm {}  preferred arm {}  E_max {:.4} J",
        coefficiency_core::bandit::argmax(&means),
        sim.preferred_arm().index,
        sim.normalization().e_max
    );

    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_path(path).map_err(failed)?;
        for r in &rows {
            w.serialize(r).map_err(failed)?;
        }
        w.flush().map_err(failed)?;
    }
    Ok(())
}
