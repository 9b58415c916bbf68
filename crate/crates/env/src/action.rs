//! Discrete per-lane actions and the continuous-to-discrete mapping.

use serde::{Deserialize, Serialize};

use crate::EnvError;

pub const N_CONTROLLED_LANES: usize = 5;
/// Number of speed-limit options per lane.
pub const M_ACTIONS: usize = 6;

/// The posted limits in m/s for indices 0..5 ([50, 55, 60, 65, 70, 75] mph).
/// A lookup table rather than min + increment arithmetic: the mph-to-m/s
/// conversions are not exactly equally spaced.
pub const SPEED_TABLE: [f64; M_ACTIONS] = [22.45, 24.695, 26.94, 29.185, 31.43, 33.679];

/// One discrete speed-limit index per controlled lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionVector(pub [usize; N_CONTROLLED_LANES]);

/// Per-lane limits in m/s; every entry is a member of [`SPEED_TABLE`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedLimits(pub [f64; N_CONTROLLED_LANES]);

/// Clips each component into [0, M], takes the integer part, and clamps the
/// upper boundary so outputs always lie in {0, .., M-1}.
pub fn map_action_g(a_hat: &[f64; N_CONTROLLED_LANES]) -> Result<ActionVector, EnvError> {
    let mut out = [0usize; N_CONTROLLED_LANES];
    for (i, &v) in a_hat.iter().enumerate() {
        if !v.is_finite() {
            return Err(EnvError::InvalidAction(format!("component {i} is {v}")));
        }
        let clipped = v.clamp(0.0, M_ACTIONS as f64);
        out[i] = (clipped.floor() as usize).min(M_ACTIONS - 1);
    }
    Ok(ActionVector(out))
}

/// Table lookup from indices to posted limits.
pub fn action_to_speeds(a: &ActionVector) -> SpeedLimits {
    let mut limits = [0.0; N_CONTROLLED_LANES];
    for (l, &idx) in a.0.iter().enumerate() {
        limits[l] = SPEED_TABLE[idx];
    }
    SpeedLimits(limits)
}

impl ActionVector {
    /// The stored discrete action as the real vector fed to value networks.
    pub fn as_f64(&self) -> [f64; N_CONTROLLED_LANES] {
        let mut out = [0.0; N_CONTROLLED_LANES];
        for (i, &v) in self.0.iter().enumerate() {
            out[i] = v as f64;
        }
        out
    }

    /// Same limit index on every lane.
    pub fn uniform(idx: usize) -> ActionVector {
        assert!(idx < M_ACTIONS);
        ActionVector([idx; N_CONTROLLED_LANES])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interior_values_take_integer_parts() {
        let a = map_action_g(&[2.3, 5.9, 0.4, 4.0, 0.0]).unwrap();
        assert_eq!(a.0, [2, 5, 0, 4, 0]);
    }

    #[test]
    fn negatives_clip_to_zero() {
        let a = map_action_g(&[-1.0, -0.1, 0.0, -0.0, 0.0]).unwrap();
        assert_eq!(a.0, [0, 0, 0, 0, 0]);
    }

    #[test]
    fn upper_boundary_clamps_into_the_codomain() {
        let a = map_action_g(&[6.0, 7.2, 6.0, 6.0, 6.0]).unwrap();
        assert_eq!(a.0, [5, 5, 5, 5, 5]);
    }

    #[test]
    fn non_finite_components_are_rejected() {
        assert!(map_action_g(&[f64::NAN, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(map_action_g(&[0.0, f64::INFINITY, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn speed_lookup_matches_the_posted_table() {
        assert_eq!(action_to_speeds(&ActionVector::uniform(0)).0, [22.45; 5]);
        assert_eq!(action_to_speeds(&ActionVector::uniform(5)).0, [33.679; 5]);
        let a = ActionVector([0, 1, 2, 3, 4]);
        assert_eq!(action_to_speeds(&a).0, [22.45, 24.695, 26.94, 29.185, 31.43]);
    }

    proptest! {
        #[test]
        fn g_is_total_on_finite_inputs(v in proptest::array::uniform5(-1e12f64..1e12)) {
            let a = map_action_g(&v).unwrap();
            for idx in a.0 {
                prop_assert!(idx < M_ACTIONS);
            }
        }

        #[test]
        fn g_is_monotone_per_coordinate(
            v in proptest::array::uniform5(-2.0f64..8.0),
            bump in 0.0f64..4.0,
            lane in 0usize..5,
        ) {
            let mut w = v;
            w[lane] += bump;
            let a = map_action_g(&v).unwrap();
            let b = map_action_g(&w).unwrap();
            prop_assert!(a.0[lane] <= b.0[lane]);
            for l in 0..5 {
                if l != lane {
                    prop_assert_eq!(a.0[l], b.0[l]);
                }
            }
        }
    }
}
