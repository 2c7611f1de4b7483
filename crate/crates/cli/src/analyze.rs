use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use coefficiency_core::bandit::{cumulative_regret, report_from_selections, ArmSpec, Parameter, Selection};
use coefficiency_core::config::ExperimentConfig;
use coefficiency_core::scalar::{mean, median};
use coefficiency_core::simulator::RunLog;
use serde::Serialize;

use crate::{create_dir, failed, invalid, AnalyzeArgs, CliResult};

#[derive(Serialize)]
struct CostRow<'a> {
    t: usize,
    arm: usize,
    group: &'a str,
    metric: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct CostSummaryRow<'a> {
    group: &'a str,
    metric: &'a str,
    n: usize,
    median: Option<f64>,
    mean: Option<f64>,
}

#[derive(Serialize)]
struct TraceRow<'a> {
    t: usize,
    parameter: &'a str,
    value: f64,
    level: usize,
    in_window: bool,
}

#[derive(Serialize)]
struct WindowRow<'a> {
    parameter: &'a str,
    learned_value: f64,
    window_mean: f64,
    distance: f64,
    preferred_value: Option<f64>,
    preferred_is_mode: bool,
    longest_preferred_streak: usize,
    converged: bool,
    convergence_iteration: Option<usize>,
}

#[derive(Serialize)]
struct RegretRow {
    t: usize,
    arm: usize,
    cumulative_regret: f64,
}

#[derive(Serialize)]
struct DistanceRow<'a> {
    scope: &'a str,
    parameter: &'a str,
    runs: usize,
    mean_distance: f64,
}

struct RunAnalysis {
    profile: String,
    distances: [f64; 3],
}

fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display())).map_err(failed)?;
    for r in rows {
        w.serialize(r).map_err(failed)?;
    }
    w.flush().map_err(failed)
}

/// Recomputes every derived series from the raw step log of one run.
fn analyze_run(dir: &Path, out: &Path) -> CliResult<RunAnalysis> {
    let log = RunLog::read_dir(dir).map_err(invalid)?;
    let meta = &log.meta;
    if let Some(f) = &log.failure {
        return Err(invalid(anyhow!("{}: run did not complete ({f})", dir.display())));
    }
    if log.steps.len() != meta.bandit.horizon {
        return Err(invalid(anyhow!("{}: {} of {} steps logged", dir.display(), log.steps.len(), meta.bandit.horizon)));
    }
    let config: ExperimentConfig = meta
        .config
        .clone()
        .ok_or_else(|| anyhow!("{}: meta.json carries no configuration", dir.display()))
        .and_then(|v| serde_json::from_value(v).map_err(Into::into))
        .map_err(invalid)?;
    let arms = config.grid.arms();
    let selections: Vec<ArmSpec<f64>> = log
        .steps
        .iter()
        .map(|s| arms.get(s.arm).copied().ok_or_else(|| anyhow!("step {} names unknown arm {}", s.t, s.arm)))
        .collect::<Result<_, _>>()
        .map_err(invalid)?;
    let (window, streak) = (meta.bandit.window, meta.bandit.streak);
    let report = report_from_selections(&arms, &selections, window, streak, Some(meta.preference)).map_err(invalid)?;
    create_dir(out)?;

    let learned = report.learned_arm;
    let group = |arm: usize| if arm == learned { "learned" } else { "other" };
    let metrics = |s: &coefficiency_core::simulator::StepRecord| {
        [("reward", s.reward), ("cognitive", s.cognitive), ("physical", s.physical), ("energy", s.energy_cost)]
    };
    write_csv(
        &out.join("cost_comparison.csv"),
        log.steps.iter().flat_map(|s| {
            metrics(s).map(|(metric, value)| CostRow { t: s.t, arm: s.arm, group: group(s.arm), metric, value })
        }),
    )?;
    let mut summary = Vec::new();
    for g in ["learned", "other"] {
        for (k, metric) in ["reward", "cognitive", "physical", "energy"].iter().enumerate() {
            let values: Vec<f64> = log.steps.iter().filter(|s| group(s.arm) == g).map(|s| metrics(s)[k].1).collect();
            summary.push(CostSummaryRow {
                group: g,
                metric,
                n: values.len(),
                median: median(&values),
                mean: mean(&values),
            });
        }
    }
    write_csv(&out.join("cost_summary.csv"), summary)?;

    let first_in_window = selections.len() - window;
    write_csv(
        &out.join("parameter_traces.csv"),
        Parameter::ALL.iter().flat_map(|&p| {
            selections.iter().enumerate().map(move |(i, a)| TraceRow {
                t: i + 1,
                parameter: p.name(),
                value: a.value(p),
                level: a.level(p),
                in_window: i >= first_in_window,
            })
        }),
    )?;
    write_csv(
        &out.join("window_summary.csv"),
        report.parameters.iter().map(|p| WindowRow {
            parameter: p.parameter.name(),
            learned_value: p.learned_value,
            window_mean: p.window_mean,
            distance: p.distance,
            preferred_value: p.preferred_value,
            preferred_is_mode: p.preferred_is_mode,
            longest_preferred_streak: p.longest_preferred_streak,
            converged: p.converged,
            convergence_iteration: p.convergence_iteration,
        }),
    )?;

    let history: Vec<Selection<f64>> =
        log.steps.iter().map(|s| Selection { t: s.t, arm: s.arm, reward: s.reward }).collect();
    let regret = cumulative_regret(&history, &meta.true_means);
    write_csv(
        &out.join("regret.csv"),
        history.iter().zip(&regret).map(|(s, r)| RegretRow { t: s.t, arm: s.arm, cumulative_regret: *r }),
    )?;

    let mut distances = [0.0; 3];
    for p in &report.parameters {
        distances[p.parameter.slot()] = p.distance;
    }
    Ok(RunAnalysis { profile: meta.profile.clone(), distances })
}

/// Run directories below `root`, in sorted order.
fn find_runs(root: &Path, found: &mut Vec<PathBuf>) -> std::io::Result<()> {
    if root.join("meta.json").is_file() {
        found.push(root.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> =
        std::fs::read_dir(root)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    entries.sort();
    for e in entries {
        find_runs(&e, found)?;
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let dir = &args.dir;
    if !dir.is_dir() {
        return Err(invalid(anyhow!("{} is not a directory", dir.display())));
    }
    let out = args.out.clone().unwrap_or_else(|| dir.join("analysis"));
    if dir.join("meta.json").is_file() {
        let a = analyze_run(dir, &out)?;
        println!(
            "run analysis written to {} (distances: orientation {:.4}, distance {:.4}, duration {:.4})",
            out.display(),
            a.distances[0],
            a.distances[1],
            a.distances[2]
        );
        return Ok(());
    }

    let mut runs = Vec::new();
    find_runs(dir, &mut runs).map_err(invalid)?;
    if runs.is_empty() {
        return Err(invalid(anyhow!("no run directories under {}", dir.display())));
    }
    let mut analyses = Vec::with_capacity(runs.len());
    for run in &runs {
        let rel = run.strip_prefix(dir).unwrap_or(run);
        analyses.push(analyze_run(run, &out.join("runs").join(rel))?);
    }

    let mut scopes: BTreeMap<&str, Vec<&RunAnalysis>> = BTreeMap::new();
    for a in &analyses {
        scopes.entry(&a.profile).or_default().push(a);
    }
    scopes.insert("all", analyses.iter().collect());
    let mut rows = Vec::new();
    for (scope, members) in &scopes {
        for p in Parameter::ALL {
            let ds: Vec<f64> = members.iter().map(|a| a.distances[p.slot()]).collect();
            rows.push(DistanceRow {
                scope,
                parameter: p.name(),
                runs: ds.len(),
                mean_distance: mean(&ds).unwrap_or(0.0),
            });
        }
    }
    write_csv(&out.join("cohort_distances.csv"), rows)?;
    println!("analysed {} runs; cohort distances in {}", analyses.len(), out.join("cohort_distances.csv").display());
    Ok(())
}
