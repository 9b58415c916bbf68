//! Comparison reporting: the per-index best-controller table, its JSON
//! mirror, and the inter-policy correlation matrix from evaluation traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::eval::{ControllerReport, EvalReport};

/// Pearson correlation of two equal-length flattened limit traces; `None`
/// when either trace has zero variance (the correlation is undefined).
pub fn policy_correlation(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(CliError::Usage(format!(
            "correlation needs equal-length traces, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Ok(None);
    }
    // A constant trace has zero variance; the rounded mean must not hide it.
    if a.iter().all(|&x| x == a[0]) || b.iter().all(|&y| y == b[0]) {
        return Ok(None);
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a) * (x - mean_a);
        var_b += (y - mean_b) * (y - mean_b);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Ok(None);
    }
    Ok(Some(cov / (var_a * var_b).sqrt()))
}

/// The nine Table-style indexes with their display scaling and direction.
pub const INDEXES: [(&str, f64, bool); 9] = [
    // (name, display divisor, higher is better)
    ("r1_e3", 1e3, true),
    ("r2_e3", 1e3, true),
    ("r3_e3", 1e3, true),
    ("r4_e7", 1e7, true),
    ("co_kg", 1.0, false),
    ("hc_kg", 1.0, false),
    ("nox_kg", 1.0, false),
    ("pmx_kg", 1.0, false),
    ("att_s", 1.0, false),
];

fn index_value(c: &ControllerReport, name: &str) -> f64 {
    let m = &c.mean;
    match name {
        "r1_e3" => m.r1,
        "r2_e3" => m.r2,
        "r3_e3" => m.r3,
        "r4_e7" => m.r4,
        "co_kg" => m.co_kg,
        "hc_kg" => m.hc_kg,
        "nox_kg" => m.nox_kg,
        "pmx_kg" => m.pmx_kg,
        "att_s" => m.att_s,
        _ => unreachable!("unknown index"),
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub episodes: usize,
    pub controllers: Vec<String>,
    /// Best controller labels per index; ties all marked.
    pub best: BTreeMap<String, Vec<String>>,
    pub table: String,
    pub correlation: Vec<CorrelationCell>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationCell {
    pub a: String,
    pub b: String,
    /// `None` when a trace has zero variance.
    pub coefficient: Option<f64>,
}

/// Merges evaluation reports into one comparison. Inputs with differing
/// episode counts are refused: their means would not be comparable.
pub fn build_report(reports: &[EvalReport], limit_traces: &BTreeMap<String, Vec<f64>>) -> Result<Report> {
    if reports.is_empty() {
        return Err(CliError::Usage("report needs at least one eval input".into()));
    }
    let episodes = reports[0].episodes;
    if reports.iter().any(|r| r.episodes != episodes) {
        return Err(CliError::Usage(format!(
            "mixed episode counts across eval inputs ({:?}); refusing to compare",
            reports.iter().map(|r| r.episodes).collect::<Vec<_>>()
        )));
    }
    let mut controllers: Vec<ControllerReport> = Vec::new();
    for r in reports {
        for c in &r.controllers {
            if controllers.iter().any(|x| x.label == c.label) {
                return Err(CliError::Usage(format!(
                    "controller label '{}' appears in more than one eval input",
                    c.label
                )));
            }
            controllers.push(c.clone());
        }
    }

    let mut best: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (name, _, higher_better) in INDEXES {
        let values: Vec<f64> = controllers.iter().map(|c| index_value(c, name)).collect();
        let best_v = if higher_better {
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        } else {
            values.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let labels = controllers
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v == best_v)
            .map(|(c, _)| c.label.clone())
            .collect();
        best.insert(name.to_string(), labels);
    }

    let table = render_table(&controllers, &best);

    let mut correlation = Vec::new();
    let labels: Vec<&String> = limit_traces.keys().collect();
    for (i, a) in labels.iter().enumerate() {
        for b in labels.iter().skip(i + 1) {
            let coefficient = policy_correlation(&limit_traces[*a], &limit_traces[*b])?;
            correlation.push(CorrelationCell {
                a: (*a).clone(),
                b: (*b).clone(),
                coefficient,
            });
        }
    }

    Ok(Report {
        episodes,
        controllers: controllers.iter().map(|c| c.label.clone()).collect(),
        best,
        table,
        correlation,
    })
}

/// Fixed-width text table; the best controller per index is starred.
fn render_table(controllers: &[ControllerReport], best: &BTreeMap<String, Vec<String>>) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<14}", "controller");
    for (name, _, _) in INDEXES {
        let _ = write!(out, "{:>12}", name);
    }
    out.push('\n');
    for c in controllers {
        let _ = write!(out, "{:<14}", c.label);
        for (name, divisor, _) in INDEXES {
            let v = index_value(c, name) / divisor;
            let marked = best[name].contains(&c.label);
            let cell = if marked { format!("*{v:.3}") } else { format!("{v:.3}") };
            let _ = write!(out, "{cell:>12}");
        }
        out.push('\n');
    }
    out
}

pub fn correlation_csv(cells: &[CorrelationCell]) -> String {
    let mut out = String::from("a,b,pearson\n");
    for c in cells {
        match c.coefficient {
            Some(v) => {
                let _ = writeln!(out, "{},{},{v}", c.a, c.b);
            }
            None => {
                let _ = writeln!(out, "{},{},undefined", c.a, c.b);
            }
        }
    }
    out
}

/// Reads the flattened per-step limit vectors from an eval `limits_*.csv`.
pub fn load_limit_trace(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut flat = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(CliError::Config(format!(
                "{}:{}: expected 6 columns",
                path.display(),
                i + 1
            )));
        }
        for cell in &cells[1..] {
            flat.push(cell.parse::<f64>().map_err(|e| {
                CliError::Config(format!("{}:{}: {e}", path.display(), i + 1))
            })?);
        }
    }
    Ok(flat)
}
