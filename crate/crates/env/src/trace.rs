//! Episode trace export: one CSV row per control step.

use std::fmt::Write as _;

use serde::Serialize;

use dvsl_sim::EmissionTotals;

use crate::action::{ActionVector, SpeedLimits};
use crate::reward::RewardSet;
use crate::state::StateVector;

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub state: StateVector,
    pub action: ActionVector,
    pub limits: SpeedLimits,
    pub rewards: RewardSet,
    pub theta: u32,
    pub emissions: EmissionTotals,
}

pub fn trace_csv_header() -> String {
    let mut h = String::from("t");
    for i in 1..=11 {
        let _ = write!(h, ",s{i}");
    }
    for i in 1..=5 {
        let _ = write!(h, ",a{i}");
    }
    for i in 1..=5 {
        let _ = write!(h, ",v{i}");
    }
    h.push_str(",r1,r2,r3,r4,theta,co_kg,hc_kg,nox_kg,pmx_kg");
    h
}

pub fn trace_csv_row(row: &TraceRow) -> String {
    let mut r = String::new();
    let _ = write!(r, "{}", row.t);
    for v in row.state.0 {
        let _ = write!(r, ",{v}");
    }
    for a in row.action.0 {
        let _ = write!(r, ",{a}");
    }
    for v in row.limits.0 {
        let _ = write!(r, ",{v}");
    }
    let _ = write!(r, ",{},{},{},{}", row.rewards.r1, row.rewards.r2, row.rewards.r3, row.rewards.r4);
    let _ = write!(r, ",{}", row.theta);
    let _ = write!(
        r,
        ",{},{},{},{}",
        row.emissions.co, row.emissions.hc, row.emissions.nox, row.emissions.pmx
    );
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_row_arity() {
        let row = TraceRow {
            t: 1,
            state: StateVector::zeros(),
            action: ActionVector::uniform(3),
            limits: crate::action::action_to_speeds(&ActionVector::uniform(3)),
            rewards: RewardSet { r1: 0.0, r2: 29.185, r3: 0.0, r4: 0.0 },
            theta: 0,
            emissions: EmissionTotals::default(),
        };
        assert_eq!(
            trace_csv_header().split(',').count(),
            trace_csv_row(&row).split(',').count()
        );
    }
}
