use std::collections::BTreeMap;
use std::path::Path;

use anyhow::anyhow;
use coefficiency_core::simulator::RunLog;
use rayon::prelude::*;
use serde::Serialize;

use crate::{create_dir, failed, invalid, load_config, CliResult, SweepArgs};

#[derive(Debug, Clone, Serialize)]
struct AggregateRow {
    profile: String,
    seed: u64,
    learned_arm: Option<usize>,
    oracle_best_arm: usize,
    hit: bool,
    converged: bool,
    convergence_iteration: Option<usize>,
    final_regret: Option<f64>,
    failure: String,
}

#[derive(Debug, Serialize)]
struct ProfileSummary {
    runs: usize,
    failures: usize,
    /// Runs whose last-window modal arm is the oracle best arm.
    hit_fraction: f64,
    converged_fraction: f64,
    mean_convergence_iteration: Option<f64>,
    mean_final_regret: Option<f64>,
}

fn row_of(profile: &str, seed: u64, oracle_best: usize, log: Result<RunLog, String>) -> AggregateRow {
    match log {
        Ok(log) => {
            let learned = log.convergence.as_ref().map(|c| c.learned_arm);
            AggregateRow {
                profile: profile.to_string(),
                seed,
                learned_arm: learned,
                oracle_best_arm: oracle_best,
                hit: learned == Some(oracle_best),
                converged: log.convergence.as_ref().is_some_and(|c| c.all_converged()),
                convergence_iteration: log.convergence.as_ref().and_then(|c| c.convergence_iteration()),
                final_regret: log.final_regret(),
                failure: log.failure.unwrap_or_default(),
            }
        }
        Err(e) => AggregateRow {
            profile: profile.to_string(),
            seed,
            learned_arm: None,
            oracle_best_arm: oracle_best,
            hit: false,
            converged: false,
            convergence_iteration: None,
            final_regret: None,
            failure: e,
        },
    }
}

fn summarize(rows: &[&AggregateRow]) -> ProfileSummary {
    let n = rows.len();
    let frac = |f: &dyn Fn(&AggregateRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / n.max(1) as f64;
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    ProfileSummary {
        runs: n,
        failures: rows.iter().filter(|r| !r.failure.is_empty()).count(),
        hit_fraction: frac(&|r| r.hit),
        converged_fraction: frac(&|r| r.converged),
        mean_convergence_iteration: mean(
            rows.iter().filter_map(|r| r.convergence_iteration.map(|t| t as f64)).collect(),
        ),
        mean_final_regret: mean(rows.iter().filter_map(|r| r.final_regret).collect()),
    }
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    let profiles: Vec<String> = if args.profile.is_empty() { cfg.sweep.profiles.clone() } else { args.profile.clone() }
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .collect();
    if profiles.is_empty() {
        return Err(invalid(anyhow!("sweep needs at least one profile")));
    }
    let seeds = args.seeds.unwrap_or(cfg.sweep.seeds);
    if seeds == 0 {
        return Err(invalid(anyhow!("sweep needs at least one seed")));
    }
    let sims = profiles
        .iter()
        .map(|name| {
            let p = cfg.profile(Some(name))?;
            p.validate(&cfg.grid)?;
            cfg.simulator(p)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid)?;
    let out = args.out.clone().unwrap_or_else(|| Path::new(&cfg.output_dir).join("sweep"));
    create_dir(&out)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.sweep.jobs).build().map_err(failed)?;
    let rows: Vec<AggregateRow> = pool.install(|| -> CliResult<Vec<AggregateRow>> {
        let means = sims.par_iter().map(|s| cfg.true_means(s)).collect::<Result<Vec<_>, _>>().map_err(failed)?;
        let jobs: Vec<(usize, u64)> = (0..sims.len()).flat_map(|p| (0..seeds).map(move |s| (p, s))).collect();
        Ok(jobs
            .par_iter()
            .map(|&(p, seed)| {
                let best = coefficiency_core::bandit::argmax(&means[p]);
                let log = cfg
                    .run(&sims[p], &means[p], seed)
                    .map(|o| o.log)
                    .and_then(|log| {
                        log.write_dir(&out.join(&profiles[p]).join(format!("seed-{seed}")))?;
                        Ok(log)
                    })
                    .map_err(|e| e.to_string());
                row_of(&profiles[p], seed, best, log)
            })
            .collect())
    })?;

    let mut w = csv::Writer::from_path(out.join("aggregate.csv")).map_err(failed)?;
    for row in &rows {
        w.serialize(row).map_err(failed)?;
    }
    w.flush().map_err(failed)?;

    let mut by_profile: BTreeMap<&str, Vec<&AggregateRow>> = BTreeMap::new();
    for row in &rows {
        by_profile.entry(&row.profile).or_default().push(row);
    }
    let summary: BTreeMap<&str, ProfileSummary> = by_profile.iter().map(|(k, v)| (*k, summarize(v))).collect();
    let all = summarize(&rows.iter().collect::<Vec<_>>());
    let json = serde_json::json!({ "seeds": seeds, "profiles": summary, "all": all });
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&json).map_err(failed)? + "\n")
        .map_err(failed)?;

    for (name, s) in &summary {
        println!(
            "{name:<14} runs {:>4}  best-arm hits {:>5.1}%  converged {:>5.1}%  mean regret {}",
            s.runs,
            100.0 * s.hit_fraction,
            100.0 * s.converged_fraction,
            s.mean_final_regret.map_or_else(|| "-".into(), |r| format!("{r:.4}"))
        );
    }
    println!("aggregate written to {}", out.join("aggregate.csv").display());
    if all.failures > 0 {
        return Err(failed(anyhow!("{} of {} runs failed; see aggregate.csv", all.failures, all.runs)));
    }
    Ok(())
}
