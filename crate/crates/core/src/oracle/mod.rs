//! Exact planning and problem-dependent constants.
//!
//! Everything here is computed from the true means of an [`Instance`]:
//! the optimal allocation `w*` and its active set `I*`, the feasibility
//! margin `γ*`, the sensitivity `S_γ*` of the optimal value to uniform
//! tightening, and the per-set gaps `s(I)`, `L(I)`, `P(I)`, `ρ(I)`.

mod gaps;
mod margin;
mod slope;
mod structure;

pub use gaps::{
    candidate_family, feasibility_gap, set_sensitivity, set_value, suboptimality_gap, CandidateFamily, SetGap,
};
pub use margin::{feasibility_margin, feasibility_margin_with, margin_value, performance_sensitivity};
pub use structure::{check_best_arm_characterization, zero_entry_exists, BestArmCheck};

pub use crate::allocation::Allocation;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::active_set::ActiveSet;
use crate::instance::Instance;
use crate::lp::{self, LinearProgram, LpError, LpStatus, SimplexOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    /// Membership tolerance for active-set extraction.
    pub tol_act: f64,
    /// Largest candidate family enumerated exhaustively for `ρ*`.
    pub enumeration_cap: usize,
    /// Grid points used by the slope estimator.
    pub slope_grid: usize,
    /// Length of the window `[s(I), s(I) + window]` searched for `L(I)`.
    pub set_window: f64,
    pub simplex: SimplexOptions,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol_act: 1e-7,
            enumeration_cap: 100_000,
            slope_grid: 64,
            set_window: 1.0,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    /// `LP(μ, μ)` has no feasible point; carries the phase-one residual.
    #[error("instance is infeasible (phase-one residual {certificate:.3e})")]
    Infeasible { certificate: f64 },
    #[error("feasibility margin {0} is not positive")]
    NonPositiveMargin(f64),
    #[error("solver contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Solves `lp`, mapping infeasibility to `None` and unboundedness to a
/// contract error (all programs here live on a product of simplices).
pub(crate) fn solve_bounded(lp: &LinearProgram, cfg: &OracleConfig) -> Result<Option<(Vec<f64>, f64)>, OracleError> {
    let sol = lp::solve_lp_with(lp, &cfg.simplex)?;
    match sol.status {
        LpStatus::Optimal => Ok(Some((sol.x.expect("optimal has x"), sol.objective_value))),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(OracleError::Contract("bounded program reported unbounded".into())),
    }
}

/// `w*`, `f*`, `I*` and a degeneracy flag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub allocation: Allocation,
    pub f_star: f64,
    pub active_set: ActiveSet,
    /// Set when `|I*| ≠ κ − |C|` or some active constraint has a zero
    /// multiplier, i.e. the optimal vertex or basis is not unique.
    pub degenerate: bool,
}

/// Extracts the binding constraints of `w` by tolerance.
pub fn extract_active_set(inst: &Instance, w: &Allocation, tol: f64) -> ActiveSet {
    let g = w.revenues(inst.weighted_means());
    let saturated = (0..inst.arms()).filter(|&k| (g[k] - inst.thresholds()[k]).abs() <= tol);
    let zeros = w.matrix().iter_pairs().filter(|&(_, v)| v <= tol).map(|(kc, _)| kc);
    ActiveSet::new(saturated, zeros)
}

/// Solves `LP(G, G, λ)`.
pub fn optimal_allocation(inst: &Instance, cfg: &OracleConfig) -> Result<Plan, OracleError> {
    let g = inst.weighted_means();
    let lp = lp::build_alloc_lp(g, g, inst.thresholds())?;
    let sol = lp::solve_lp_with(&lp, &cfg.simplex)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(OracleError::Infeasible {
                certificate: sol.infeasibility,
            })
        }
        LpStatus::Unbounded => return Err(OracleError::Contract("allocation program unbounded".into())),
    }
    let x = sol.x.as_ref().expect("optimal has x");
    let allocation = Allocation::from_lp(x, inst.arms(), inst.contexts())
        .map_err(|e| OracleError::Contract(format!("solver returned an invalid allocation: {e}")))?;
    let active_set = extract_active_set(inst, &allocation, cfg.tol_act);
    let basis_size = inst.kappa() - inst.contexts();
    let zero_multiplier = active_set.saturated_arms().iter().any(|&k| sol.dual_values[k].abs() <= cfg.tol_act)
        || active_set
            .zero_pairs()
            .iter()
            .any(|&(k, c)| sol.reduced_costs[lp::pair_var(inst.arms(), k, c)].abs() <= cfg.tol_act);
    Ok(Plan {
        f_star: allocation.objective(g),
        allocation,
        active_set: active_set.clone(),
        degenerate: active_set.len() != basis_size || zero_multiplier,
    })
}

/// Summary of the candidate-set enumeration behind `ρ*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Enumeration {
    /// Size of the full basis-sized family.
    pub family_size: u128,
    pub evaluated: usize,
    /// `false` when the cap truncated the family; `ρ*` is then a minimum
    /// over the evaluated subfamily only.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub instance: String,
    pub w_star: Allocation,
    pub f_star: f64,
    pub active_set: ActiveSet,
    pub degenerate: bool,
    pub gamma_star: f64,
    /// `None` when `γ* = 0`, where the coefficient is undefined.
    pub s_gamma: Option<f64>,
    /// Gaps of `I*` itself.
    pub optimal_set_gap: SetGap,
    /// `min ρ(I)` over enumerated `I ≠ I*`; `None` if no such set exists.
    pub rho_star: Option<f64>,
    pub enumeration: Enumeration,
    /// Gaps of every enumerated `I ≠ I*`, ascending in `ρ`.
    pub per_set_gaps: Vec<SetGap>,
}

impl OracleReport {
    pub fn top(&self, n: usize) -> &[SetGap] {
        &self.per_set_gaps[..n.min(self.per_set_gaps.len())]
    }
}

/// Constants shared by every `ρ(I)` evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapContext {
    pub f_star: f64,
    /// `max(1, S_γ*)`.
    pub normalizer: f64,
}

/// Full oracle analysis: plan, margin, sensitivity and `ρ*` enumeration.
pub fn analyze(inst: &Instance, cfg: &OracleConfig) -> Result<OracleReport, OracleError> {
    let plan = optimal_allocation(inst, cfg)?;
    let gamma_star = feasibility_margin_with(inst, cfg)?;
    let s_gamma = if gamma_star > 0.0 {
        Some(performance_sensitivity(inst, gamma_star, cfg)?)
    } else {
        None
    };
    let ctx = GapContext {
        f_star: plan.f_star,
        normalizer: s_gamma.unwrap_or(0.0).max(1.0),
    };
    let optimal_set_gap = suboptimality_gap(inst, &plan.active_set, &ctx, cfg)?;
    let family = candidate_family(inst.arms(), inst.contexts(), cfg.enumeration_cap);
    let others: Vec<&ActiveSet> = family.sets.iter().filter(|s| **s != plan.active_set).collect();
    let gaps: Result<Vec<SetGap>, OracleError> =
        others.par_iter().map(|set| suboptimality_gap(inst, set, &ctx, cfg)).collect();
    let mut per_set_gaps = gaps?;
    // Stable sort on a total order keeps the report independent of how the
    // parallel map was scheduled.
    per_set_gaps.sort_by(|a, b| a.rho.total_cmp(&b.rho).then_with(|| a.set.cmp(&b.set)));
    let rho_star = per_set_gaps.first().map(|g| g.rho);
    Ok(OracleReport {
        instance: inst.name().to_string(),
        w_star: plan.allocation,
        f_star: plan.f_star,
        active_set: plan.active_set,
        degenerate: plan.degenerate,
        gamma_star,
        s_gamma,
        optimal_set_gap,
        rho_star,
        enumeration: Enumeration {
            family_size: family.family_size,
            evaluated: family.sets.len(),
            complete: family.complete,
        },
        per_set_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::catalog_get;
    use crate::matrix::PairMatrix;

    #[test]
    fn nu_sim_plan() {
        let inst = catalog_get("nu_sim", None).unwrap();
        let plan = optimal_allocation(&inst, &OracleConfig::default()).unwrap();
        let expected = PairMatrix::from_rows(&[vec![1.0, 0.5, 0.5], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5]]).unwrap();
        assert!(plan.allocation.matrix().max_abs_diff(&expected) < 1e-9);
        assert!((plan.f_star - 5.25).abs() < 1e-9);
        assert_eq!(plan.active_set, ActiveSet::from_one_based(&[2, 3], &[(2, 1), (3, 1), (3, 2), (2, 3)]));
        assert!(!plan.degenerate);
    }

    #[test]
    fn infeasible_carries_certificate() {
        let inst = catalog_get("nu_sim", None).unwrap().with_thresholds(vec![1.0, 0.75, 0.5]).unwrap();
        match optimal_allocation(&inst, &OracleConfig::default()) {
            Err(OracleError::Infeasible { certificate }) => assert!(certificate > 0.1),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
