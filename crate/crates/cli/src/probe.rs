//! Interpretability probe: evaluates frozen policies on the 16 synthetic
//! states that sweep merge occupancy from free flow to congestion while the
//! upstream and ramp stay free.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use dvsl_env::probe_state;

use crate::config::ExperimentConfig;
use crate::controllers::{check_unique_labels, ControllerArg};
use crate::error::{CliError, Result};

pub const PROBE_COUNT: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub j: usize,
    pub merge_occupancy: f64,
    pub limits: [f64; 5],
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub label: String,
    pub kind: String,
    pub rows: Vec<ProbeRow>,
}

pub fn probe(
    config: &ExperimentConfig,
    args: &[ControllerArg],
    out_dir: Option<&Path>,
) -> Result<Vec<ProbeResult>> {
    if args.is_empty() {
        return Err(CliError::Usage("probe needs at least one --controller".into()));
    }
    check_unique_labels(args)?;
    let mut results = Vec::new();
    for arg in args {
        let controller = arg.load(&config.agent)?;
        let rows: Vec<ProbeRow> = (0..PROBE_COUNT)
            .map(|j| {
                let s = probe_state(j);
                ProbeRow { j, merge_occupancy: s.merge_occupancies()[0], limits: controller.limits(&s).0 }
            })
            .collect();
        results.push(ProbeResult { label: arg.label.clone(), kind: arg.kind.clone(), rows });
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("probe.csv"), probe_csv(&results))?;
        std::fs::write(
            dir.join("probe.json"),
            serde_json::to_string_pretty(&results).map_err(|e| CliError::Runtime(e.to_string()))?,
        )?;
    }
    Ok(results)
}

pub fn probe_csv(results: &[ProbeResult]) -> String {
    let mut out = String::from("controller,j,merge_occupancy,v1,v2,v3,v4,v5\n");
    for r in results {
        for row in &r.rows {
            let _ = write!(out, "{},{},{}", r.label, row.j, row.merge_occupancy);
            for v in row.limits {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}
