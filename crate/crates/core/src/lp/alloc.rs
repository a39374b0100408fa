//! Allocation programs over the product of per-context simplices.
//!
//! The decision variable `w` is a `K × |C|` column-stochastic matrix laid
//! out context-major (see [`PairMatrix`]). All mean matrices passed here are
//! already weighted by the context probabilities, i.e. entry `(k, c)` is
//! `p_c · μ_{k,c}`.

use super::{LinearProgram, LpError, Sense};
use crate::active_set::ActiveSet;
use crate::matrix::PairMatrix;

/// Index of LP variable `w_{k,c}`.
#[inline]
pub fn pair_var(arms: usize, k: usize, c: usize) -> usize {
    c * arms + k
}

/// Expected revenue `f(μ, w) = Σ_c p_c μ_cᵀ w_c` for weighted means.
pub fn objective_value(weighted: &PairMatrix, w: &PairMatrix) -> f64 {
    weighted.dot(w)
}

/// Aggregated revenue `g_k(μ, w)` of arm `k`.
pub fn revenue(weighted: &PairMatrix, w: &PairMatrix, k: usize) -> f64 {
    (0..weighted.contexts()).map(|c| weighted[(k, c)] * w[(k, c)]).sum()
}

pub fn revenues(weighted: &PairMatrix, w: &PairMatrix) -> Vec<f64> {
    (0..weighted.arms()).map(|k| revenue(weighted, w, k)).collect()
}

fn check_shapes(obj: &PairMatrix, cons: &PairMatrix, thresholds: &[f64]) -> Result<(), LpError> {
    if obj.shape() != cons.shape() {
        return Err(LpError::DimensionMismatch {
            what: "constraint means",
            expected: obj.arms() * obj.contexts(),
            found: cons.arms() * cons.contexts(),
        });
    }
    if thresholds.len() != obj.arms() {
        return Err(LpError::DimensionMismatch {
            what: "thresholds",
            expected: obj.arms(),
            found: thresholds.len(),
        });
    }
    Ok(())
}

fn revenue_terms(cons: &PairMatrix, k: usize) -> Vec<(usize, f64)> {
    (0..cons.contexts())
        .map(|c| (pair_var(cons.arms(), k, c), cons[(k, c)]))
        .collect()
}

fn add_simplex_rows(lp: &mut LinearProgram, arms: usize, contexts: usize) {
    for c in 0..contexts {
        let terms: Vec<_> = (0..arms).map(|k| (pair_var(arms, k, c), 1.0)).collect();
        lp.add_sparse(&terms, Sense::Eq, 1.0);
    }
}

/// `LP(μ^obj, μ^cons)`: maximize `f(μ^obj, w)` subject to
/// `g_k(μ^cons, w) ≥ λ_k` for every arm and `Σ_k w_{k,c} = 1` per context.
///
/// Rows are the `K` revenue constraints followed by the `|C|` simplex rows.
pub fn build_alloc_lp(obj: &PairMatrix, cons: &PairMatrix, thresholds: &[f64]) -> Result<LinearProgram, LpError> {
    check_shapes(obj, cons, thresholds)?;
    let (arms, contexts) = obj.shape();
    let mut lp = LinearProgram::new(arms * contexts);
    lp.set_objective(obj.as_slice().to_vec());
    for (k, &lambda) in thresholds.iter().enumerate() {
        lp.add_sparse(&revenue_terms(cons, k), Sense::Ge, lambda);
    }
    add_simplex_rows(&mut lp, arms, contexts);
    Ok(lp)
}

/// `OPT(μ^obj, μ^cons, I)`: saturated arms are pinned to `g_k = λ_k`, listed
/// pairs to `w_{k,c} = 0`; revenue constraints of other arms are dropped.
///
/// Rows: one per saturated arm (ascending), one per zero pair (ascending),
/// then the simplex rows.
pub fn build_opt_lp(
    obj: &PairMatrix,
    cons: &PairMatrix,
    thresholds: &[f64],
    active: &ActiveSet,
) -> Result<LinearProgram, LpError> {
    check_shapes(obj, cons, thresholds)?;
    let (arms, contexts) = obj.shape();
    active.check_range(arms, contexts)?;
    let mut lp = LinearProgram::new(arms * contexts);
    lp.set_objective(obj.as_slice().to_vec());
    for &k in active.saturated_arms() {
        lp.add_sparse(&revenue_terms(cons, k), Sense::Eq, thresholds[k]);
    }
    for &(k, c) in active.zero_pairs() {
        lp.add_sparse(&[(pair_var(arms, k, c), 1.0)], Sense::Eq, 0.0);
    }
    add_simplex_rows(&mut lp, arms, contexts);
    Ok(lp)
}
