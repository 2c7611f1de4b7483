use std::fmt::Write as _;
use std::path::Path;

use anyhow::anyhow;
use coefficiency_core::simulator::RunLog;

use crate::{failed, invalid, load_config, CliResult, RunArgs};

pub fn run(args: &RunArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let profile = cfg.profile(args.profile.as_deref()).map_err(invalid)?;
    profile.validate(&cfg.grid).map_err(invalid)?;
    let name = profile.name.clone();
    let sim = cfg.simulator(profile).map_err(invalid)?;
    let means = cfg.true_means(&sim).map_err(failed)?;
    let outcome = cfg.run(&sim, &means, seed).map_err(failed)?;

    let dir = args.out.clone().unwrap_or_else(|| Path::new(&cfg.output_dir).join(format!("{name}-seed{seed}")));
    outcome.log.write_dir(&dir).map_err(failed)?;
    print!("{}", summarize(&outcome.log, &dir));
    match &outcome.log.failure {
        Some(f) => Err(failed(anyhow!("{f} (partial log in {})", dir.display()))),
        None => Ok(()),
    }
}

/// Human-readable outcome of one run.
pub fn summarize(log: &RunLog, dir: &Path) -> String {
    let m = &log.meta;
    let mut s = String::new();
    let _ = writeln!(s, "profile {}  seed {}  iterations {}  -> {}", m.profile, m.seed, log.steps.len(), dir.display());
    if let Some(c) = &log.convergence {
        let _ = writeln!(
            s,
            "learned arm {}  oracle best {}  preferred {}",
            c.learned_arm, m.oracle_best_arm, m.preferred_arm
        );
        for p in &c.parameters {
            let at =
                p.convergence_iteration.map_or_else(|| "not converged".to_string(), |t| format!("converged at {t}"));
            let _ = writeln!(
                s,
                "  {:<12} learned {:.4}  window mean {:.4}  distance {:.4}  {at}",
                p.parameter.name(),
                p.learned_value,
                p.window_mean,
                p.distance
            );
        }
    }
    if let Some(r) = log.final_regret() {
        let _ = writeln!(s, "cumulative regret {r:.4}");
    }
    s
}
