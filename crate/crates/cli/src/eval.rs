//! Frozen-policy evaluation: every controller runs the same seeded demand
//! episodes; accumulated rewards, emissions and travel times are averaged
//! and exported as JSON/CSV plus per-step traces for plotting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dvsl_agents::{derive_seed, Controller};
use dvsl_env::{trace_csv_header, trace_csv_row, RewardKind, TraceRow, TrafficEnv};
use dvsl_sim::Scenario;

use crate::config::ExperimentConfig;
use crate::controllers::{check_unique_labels, ControllerArg};
use crate::error::{CliError, Result};

/// Evaluation seed stream, distinct from the training stream.
pub const EVAL_SEED_STREAM: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalMetricsRow {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub co_kg: f64,
    pub hc_kg: f64,
    pub nox_kg: f64,
    pub pmx_kg: f64,
    pub att_s: f64,
    pub theta: f64,
    pub completed: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerReport {
    pub label: String,
    pub kind: String,
    pub mean: EvalMetricsRow,
    pub per_episode: Vec<EvalMetricsRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub master_seed: u64,
    pub episode_intervals: usize,
    /// Hex demand checksums per episode; identical for every controller by
    /// construction and verified at run time.
    pub demand_checksums: Vec<String>,
    pub controllers: Vec<ControllerReport>,
}

struct EpisodeOutcome {
    row: EvalMetricsRow,
    checksum: u64,
    trace: Option<Vec<TraceRow>>,
}

fn run_episode(
    scenario: &Scenario,
    controller: &dyn Controller,
    seed: u64,
    keep_trace: bool,
) -> Result<EpisodeOutcome> {
    let mut env = TrafficEnv::new(scenario, RewardKind::R1Flow, seed)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut state = env.state();
    let mut theta = 0.0;
    while !env.done() {
        let action = controller.action(&state);
        let result = env.step(&action).map_err(|e| CliError::Runtime(e.to_string()))?;
        theta += result.metrics.theta as f64;
        state = result.state;
    }
    let acc = env.accumulated_rewards();
    let tts = env.tts_report();
    let em = env.world().episode_emissions();
    let row = EvalMetricsRow {
        r1: acc.r1,
        r2: acc.r2,
        r3: acc.r3,
        r4: acc.r4,
        co_kg: em.co,
        hc_kg: em.hc,
        nox_kg: em.nox,
        pmx_kg: em.pmx,
        att_s: tts.att,
        theta,
        completed: tts.completed as f64,
        residual: tts.residual_vehicles as f64,
    };
    Ok(EpisodeOutcome {
        row,
        checksum: env.demand_checksum(),
        trace: keep_trace.then(|| env.trace().to_vec()),
    })
}

fn mean_rows(rows: &[EvalMetricsRow]) -> EvalMetricsRow {
    let n = rows.len().max(1) as f64;
    let sum = |f: fn(&EvalMetricsRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    EvalMetricsRow {
        r1: sum(|r| r.r1),
        r2: sum(|r| r.r2),
        r3: sum(|r| r.r3),
        r4: sum(|r| r.r4),
        co_kg: sum(|r| r.co_kg),
        hc_kg: sum(|r| r.hc_kg),
        nox_kg: sum(|r| r.nox_kg),
        pmx_kg: sum(|r| r.pmx_kg),
        att_s: sum(|r| r.att_s),
        theta: sum(|r| r.theta),
        completed: sum(|r| r.completed),
        residual: sum(|r| r.residual),
    }
}

/// Runs every controller over the same seeded episodes. Writes, per
/// controller, the episode-0 limit and full traces; returns the report.
pub fn evaluate(
    config: &ExperimentConfig,
    args: &[ControllerArg],
    episodes: usize,
    master_seed: u64,
    out_dir: Option<&Path>,
) -> Result<EvalReport> {
    if args.is_empty() {
        return Err(CliError::Usage("eval needs at least one --controller".into()));
    }
    if episodes == 0 {
        return Err(CliError::Usage("eval needs at least one episode".into()));
    }
    check_unique_labels(args)?;
    let scenario = &config.scenario;
    let seeds: Vec<u64> =
        (0..episodes).map(|e| derive_seed(master_seed, EVAL_SEED_STREAM, e as u64)).collect();

    let mut controllers: Vec<(String, String, Box<dyn Controller>)> = Vec::new();
    for arg in args {
        controllers.push((arg.label.clone(), arg.kind.clone(), arg.load(&config.agent)?));
    }

    let mut reports = Vec::new();
    let mut checksums: Option<Vec<u64>> = None;
    for (label, kind, controller) in &controllers {
        let outcomes: Vec<EpisodeOutcome> = seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| run_episode(scenario, controller.as_ref(), seed, i == 0))
            .collect::<Result<Vec<_>>>()?;
        let these: Vec<u64> = outcomes.iter().map(|o| o.checksum).collect();
        match &checksums {
            None => checksums = Some(these),
            Some(expected) => {
                if *expected != these {
                    return Err(CliError::Runtime(format!(
                        "demand checksum mismatch for controller '{label}': \
                         evaluation would not be fair"
                    )));
                }
            }
        }
        if let (Some(dir), Some(trace)) = (out_dir, outcomes[0].trace.as_ref()) {
            write_traces(dir, label, trace)?;
        }
        let rows: Vec<EvalMetricsRow> = outcomes.into_iter().map(|o| o.row).collect();
        reports.push(ControllerReport {
            label: label.clone(),
            kind: kind.clone(),
            mean: mean_rows(&rows),
            per_episode: rows,
        });
    }

    let report = EvalReport {
        episodes,
        master_seed,
        episode_intervals: scenario.control.episode_intervals,
        demand_checksums: checksums
            .unwrap_or_default()
            .iter()
            .map(|c| format!("{c:016x}"))
            .collect(),
        controllers: reports,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("eval_report.json"), serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Runtime(e.to_string()))?)?;
        std::fs::write(dir.join("eval_report.csv"), report_csv(&report))?;
    }
    Ok(report)
}

fn write_traces(dir: &Path, label: &str, trace: &[TraceRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut limits = String::from("t,v1,v2,v3,v4,v5\n");
    for row in trace {
        let _ = write!(limits, "{}", row.t);
        for v in row.limits.0 {
            let _ = write!(limits, ",{v}");
        }
        limits.push('\n');
    }
    std::fs::write(dir.join(format!("limits_{label}.csv")), limits)?;
    let mut full = trace_csv_header();
    full.push('\n');
    for row in trace {
        full.push_str(&trace_csv_row(row));
        full.push('\n');
    }
    std::fs::write(dir.join(format!("trace_{label}.csv")), full)?;
    Ok(())
}

/// Table-1-style scaled columns.
pub fn report_csv(report: &EvalReport) -> String {
    let mut out = String::from(
        "controller,r1_e3,r2_e3,r3_e3,r4_e7,co_kg,hc_kg,nox_kg,pmx_kg,att_s,theta,completed,residual\n",
    );
    for c in &report.controllers {
        let m = &c.mean;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.label,
            m.r1 / 1e3,
            m.r2 / 1e3,
            m.r3 / 1e3,
            m.r4 / 1e7,
            m.co_kg,
            m.hc_kg,
            m.nox_kg,
            m.pmx_kg,
            m.att_s,
            m.theta,
            m.completed,
            m.residual
        );
    }
    out
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} does not parse: {e}", path.display())))
}

pub fn out_path(dir: &Path) -> PathBuf {
    dir.join("eval_report.json")
}
