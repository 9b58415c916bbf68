//! One-episode walkthrough: runs a controller on a seeded scenario, prints
//! interval summaries and writes the full metrics and trace files.

use std::fmt::Write as _;
use std::path::Path;

use dvsl_agents::Controller;
use dvsl_env::{trace_csv_header, trace_csv_row, RewardKind, TrafficEnv};
use dvsl_sim::{metrics_csv_header, metrics_csv_row};

use crate::config::ExperimentConfig;
use crate::controllers::ControllerArg;
use crate::error::{CliError, Result};

pub fn demo(
    config: &ExperimentConfig,
    arg: &ControllerArg,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<String> {
    let controller: Box<dyn Controller> = arg.load(&config.agent)?;
    let mut env = TrafficEnv::new(&config.scenario, RewardKind::R1Flow, seed)
        .map_err(CliError::from)?;
    let mut state = env.state();
    let mut metrics_csv = metrics_csv_header();
    metrics_csv.push('\n');
    let mut lines = String::new();
    let report_every = (env.episode_intervals() / 12).max(1);
    let mut interval = 0usize;
    while !env.done() {
        let action = controller.action(&state);
        let result = env.step(&action).map_err(CliError::from)?;
        metrics_csv.push_str(&metrics_csv_row(&result.metrics));
        metrics_csv.push('\n');
        interval += 1;
        if interval % report_every == 0 {
            let occ: f64 =
                result.state.merge_occupancies().iter().sum::<f64>() / 5.0;
            let _ = writeln!(
                lines,
                "t={:>6.0}s merge_occ={occ:.3} r1={:+.0} r2={:.1} theta={} in={} out={}",
                result.metrics.time,
                result.rewards.r1,
                result.rewards.r2,
                result.metrics.theta,
                result.metrics.inflow,
                result.metrics.outflow,
            );
        }
        state = result.state;
    }
    let acc = env.accumulated_rewards();
    let tts = env.tts_report();
    let _ = writeln!(
        lines,
        "episode done: controller={} r1={:.0} r2={:.0} r3={:.0} r4={:.1} att={:.1}s \
         completed={} residual={} missed_exits={}",
        arg.label,
        acc.r1,
        acc.r2,
        acc.r3,
        acc.r4,
        tts.att,
        tts.completed,
        tts.residual_vehicles,
        tts.missed_exits,
    );
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("demo_metrics_{}.csv", arg.label)), metrics_csv)?;
        let mut trace = trace_csv_header();
        trace.push('\n');
        for row in env.trace() {
            trace.push_str(&trace_csv_row(row));
            trace.push('\n');
        }
        std::fs::write(dir.join(format!("demo_trace_{}.csv", arg.label)), trace)?;
    }
    Ok(lines)
}
