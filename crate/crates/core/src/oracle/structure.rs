//! Structural checks on optimal allocations.

use serde::Serialize;

use crate::active_set::ActiveSet;
use crate::allocation::Allocation;
use crate::instance::Instance;

const MEAN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestArmCheck {
    pub holds: bool,
    /// First `(arm, context)` (0-based) getting mass without being the
    /// per-context best arm or saturated.
    pub witness: Option<(usize, usize)>,
}

/// Every non-saturated arm that receives mass in a context is a best arm of
/// that context.
pub fn check_best_arm_characterization(inst: &Instance, w: &Allocation, active: &ActiveSet, tol_act: f64) -> BestArmCheck {
    let mu = inst.means();
    for c in 0..inst.contexts() {
        let best = mu.column(c).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for k in 0..inst.arms() {
            if w.get(k, c) > tol_act && !active.is_saturated(k) && mu[(k, c)] < best - MEAN_TOL {
                return BestArmCheck {
                    holds: false,
                    witness: Some((k, c)),
                };
            }
        }
    }
    BestArmCheck {
        holds: true,
        witness: None,
    }
}

/// Some entry of `w` is zero (to within `tol_act`).
pub fn zero_entry_exists(w: &Allocation, tol_act: f64) -> bool {
    w.matrix().as_slice().iter().any(|&v| v <= tol_act)
}
