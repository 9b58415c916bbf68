//! MDP wrapper around the microsimulation: 11-dimensional occupancy state,
//! per-lane discrete speed-limit actions through the continuous-to-discrete
//! mapping, one-minute control intervals and the four reward signals.

mod action;
mod env;
mod error;
mod reward;
mod state;
mod trace;

pub use action::{action_to_speeds, map_action_g, ActionVector, SpeedLimits, M_ACTIONS,
    N_CONTROLLED_LANES, SPEED_TABLE};
pub use env::{StepResult, TrafficEnv, Transition, TtsReport};
pub use error::EnvError;
pub use reward::{RewardKind, RewardSet};
pub use state::{probe_state, StateVector, STATE_DIM};
pub use trace::{trace_csv_header, trace_csv_row, TraceRow};
