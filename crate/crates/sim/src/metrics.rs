//! Fixed-column CSV export of per-interval metrics.

use std::fmt::Write as _;

use crate::world::IntervalMetrics;

/// Column order is part of the file contract; downstream plotting relies on it.
pub fn metrics_csv_header() -> String {
    let mut h = String::from("time");
    for station in ["up", "mrg"] {
        for l in 1..=5 {
            let _ = write!(h, ",occ_{station}{l}");
        }
    }
    h.push_str(",occ_ramp");
    for station in ["up", "mrg"] {
        for l in 1..=5 {
            let _ = write!(h, ",spd_{station}{l}");
        }
    }
    h.push_str(",spd_ramp");
    for station in ["up", "mrg"] {
        for l in 1..=5 {
            let _ = write!(h, ",flow_{station}{l}");
        }
    }
    h.push_str(",flow_ramp,f_in,f_out,theta,co_kg,hc_kg,nox_kg,pmx_kg");
    for l in 1..=5 {
        let _ = write!(h, ",limit_{l}");
    }
    h
}

pub fn metrics_csv_row(m: &IntervalMetrics) -> String {
    let mut r = String::new();
    let _ = write!(r, "{}", m.time);
    for v in m.upstream.occupancy.iter().chain(m.merge.occupancy.iter()) {
        let _ = write!(r, ",{v}");
    }
    let _ = write!(r, ",{}", m.ramp.occupancy[0]);
    for v in m.upstream.mean_speed.iter().chain(m.merge.mean_speed.iter()) {
        let _ = write!(r, ",{v}");
    }
    let _ = write!(r, ",{}", m.ramp.mean_speed[0]);
    for v in m.upstream.flow.iter().chain(m.merge.flow.iter()) {
        let _ = write!(r, ",{v}");
    }
    let _ = write!(r, ",{}", m.ramp.flow[0]);
    let _ = write!(r, ",{},{},{}", m.inflow, m.outflow, m.theta);
    let _ = write!(r, ",{},{},{},{}", m.emissions.co, m.emissions.hc, m.emissions.nox, m.emissions.pmx);
    for v in m.limits {
        let _ = write!(r, ",{v}");
    }
    r
}
