//! The four reward signals computed from one control interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use dvsl_sim::IntervalMetrics;

use crate::EnvError;

/// Euro-standard weights (kg) dividing each pollutant in the emission reward.
pub const EMISSION_WEIGHTS: [f64; 4] = [1.5, 0.13, 0.04, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// Flow balance f_out - f_in; maximizing it minimizes total travel time.
    R1Flow,
    /// Mean detector speed across the merge-area lanes.
    R2BottleneckSpeed,
    /// Negated count of emergency-braking vehicles.
    R3Safety,
    /// Negated weighted sum of CO, HC, NOx and PMx emissions.
    R4Emission,
}

impl RewardKind {
    pub const ALL: [RewardKind; 4] = [
        RewardKind::R1Flow,
        RewardKind::R2BottleneckSpeed,
        RewardKind::R3Safety,
        RewardKind::R4Emission,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RewardKind::R1Flow => "r1",
            RewardKind::R2BottleneckSpeed => "r2",
            RewardKind::R3Safety => "r3",
            RewardKind::R4Emission => "r4",
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RewardKind {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r1" | "flow" => Ok(RewardKind::R1Flow),
            "r2" | "speed" => Ok(RewardKind::R2BottleneckSpeed),
            "r3" | "safety" => Ok(RewardKind::R3Safety),
            "r4" | "emission" => Ok(RewardKind::R4Emission),
            other => Err(EnvError::UnknownRewardKind(other.to_string())),
        }
    }
}

/// All four signals for one control interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSet {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

impl RewardSet {
    pub fn from_metrics(m: &IntervalMetrics) -> Self {
        let r1 = m.outflow as f64 - m.inflow as f64;
        let r2 = m.merge.mean_speed.iter().sum::<f64>() / m.merge.mean_speed.len() as f64;
        let r3 = -(m.theta as f64);
        let e = &m.emissions;
        let r4 = -(e.co / EMISSION_WEIGHTS[0]
            + e.hc / EMISSION_WEIGHTS[1]
            + e.nox / EMISSION_WEIGHTS[2]
            + e.pmx / EMISSION_WEIGHTS[3]);
        RewardSet { r1, r2, r3, r4 }
    }

    pub fn get(&self, kind: RewardKind) -> f64 {
        match kind {
            RewardKind::R1Flow => self.r1,
            RewardKind::R2BottleneckSpeed => self.r2,
            RewardKind::R3Safety => self.r3,
            RewardKind::R4Emission => self.r4,
        }
    }
}
