//! The controller's observation: 11 occupancy rates in fixed order
//! (merge lanes 1-5, upstream lanes 1-5, on-ramp).

use serde::{Deserialize, Serialize};

use dvsl_sim::IntervalMetrics;

pub const STATE_DIM: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector(pub [f64; STATE_DIM]);

impl StateVector {
    pub fn zeros() -> Self {
        StateVector([0.0; STATE_DIM])
    }

    /// Builds the state from interval detector readings, clamped to [0, 1].
    pub fn from_metrics(m: &IntervalMetrics) -> Self {
        let mut s = [0.0; STATE_DIM];
        for (i, v) in m.merge.occupancy.iter().enumerate() {
            s[i] = v.clamp(0.0, 1.0);
        }
        for (i, v) in m.upstream.occupancy.iter().enumerate() {
            s[5 + i] = v.clamp(0.0, 1.0);
        }
        s[10] = m.ramp.occupancy[0].clamp(0.0, 1.0);
        StateVector(s)
    }

    pub fn merge_occupancies(&self) -> &[f64] {
        &self.0[0..5]
    }

    pub fn upstream_occupancies(&self) -> &[f64] {
        &self.0[5..10]
    }

    pub fn ramp_occupancy(&self) -> f64 {
        self.0[10]
    }

    /// Mean upstream, merge and ramp occupancies, in that order; the
    /// discretized baseline controllers key their table on these.
    pub fn section_means(&self) -> (f64, f64, f64) {
        let up = self.upstream_occupancies().iter().sum::<f64>() / 5.0;
        let mrg = self.merge_occupancies().iter().sum::<f64>() / 5.0;
        (up, mrg, self.ramp_occupancy())
    }
}

/// Synthetic probe state j: merge occupancies 0.05*j with upstream and ramp
/// held at free-flow 0.05, for j = 0..=15.
pub fn probe_state(j: usize) -> StateVector {
    let mut s = [0.05; STATE_DIM];
    for k in 0..5 {
        s[k] = 0.05 * j as f64;
    }
    StateVector(s)
}
