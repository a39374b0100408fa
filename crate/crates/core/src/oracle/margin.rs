//! Feasibility margin `γ*` and the sensitivity `S_γ*`.

use super::slope::{steepest_slope, Steep};
use super::{solve_bounded, OracleConfig, OracleError};
use crate::instance::Instance;
use crate::lp::{self, Sense};

/// `γ* = max { s ≥ 0 : ∃ w, g_k(μ, w) ≥ λ_k + s ∀k }`.
pub fn feasibility_margin(inst: &Instance) -> Result<f64, OracleError> {
    feasibility_margin_with(inst, &OracleConfig::default())
}

pub fn feasibility_margin_with(inst: &Instance, cfg: &OracleConfig) -> Result<f64, OracleError> {
    let g = inst.weighted_means();
    let (arms, contexts) = g.shape();
    let n = arms * contexts;
    // Variables: w (context-major), then s.
    let mut prog = lp::LinearProgram::new(n + 1);
    prog.set_objective_coeff(n, 1.0);
    for (k, &lambda) in inst.thresholds().iter().enumerate() {
        let mut terms: Vec<_> = (0..contexts).map(|c| (lp::pair_var(arms, k, c), g[(k, c)])).collect();
        terms.push((n, -1.0));
        prog.add_sparse(&terms, Sense::Ge, lambda);
    }
    for c in 0..contexts {
        let terms: Vec<_> = (0..arms).map(|k| (lp::pair_var(arms, k, c), 1.0)).collect();
        prog.add_sparse(&terms, Sense::Eq, 1.0);
    }
    match lp::solve_lp_with(&prog, &cfg.simplex)? {
        sol if sol.is_optimal() => Ok(sol.objective_value.max(0.0)),
        sol if sol.status == lp::LpStatus::Infeasible => Err(OracleError::Infeasible {
            certificate: sol.infeasibility,
        }),
        _ => Err(OracleError::Contract("margin program unbounded".into())),
    }
}

/// `y(s) = max { f(μ, w) : g_k(μ, w) ≥ λ_k + s ∀k }`, or `None` if the
/// tightened program is infeasible.
pub fn margin_value(inst: &Instance, s: f64, cfg: &OracleConfig) -> Result<Option<f64>, OracleError> {
    let g = inst.weighted_means();
    let shifted: Vec<f64> = inst.thresholds().iter().map(|l| l + s).collect();
    let prog = lp::build_alloc_lp(g, g, &shifted)?;
    Ok(solve_bounded(&prog, cfg)?.map(|(_, v)| v))
}

/// `S_γ*`: steepest decrease of `y` on `[0, γ*]`.
pub fn performance_sensitivity(inst: &Instance, gamma_star: f64, cfg: &OracleConfig) -> Result<f64, OracleError> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(gamma_star > 0.0) {
        return Err(OracleError::NonPositiveMargin(gamma_star));
    }
    steepest_slope(|s| margin_value(inst, s, cfg), 0.0, gamma_star, Steep::Right, cfg.slope_grid)
}
