//! Per-set gaps `s(I)`, `L(I)`, `P(I)`, `ρ(I)` and the candidate family.

use itertools::Itertools;
use serde::Serialize;

use super::slope::{steepest_slope, Steep};
use super::{solve_bounded, GapContext, OracleConfig, OracleError};
use crate::active_set::ActiveSet;
use crate::instance::Instance;
use crate::lp::{self, LinearProgram, Sense};

/// Builds the constraints of `ψ(s, I)` over `w` (first `κ` variables). If
/// `slack_var` is given, `s` is that variable; otherwise it is the constant
/// `fixed_s`.
fn add_relaxed_rows(prog: &mut LinearProgram, inst: &Instance, set: &ActiveSet, slack_var: Option<usize>, fixed_s: f64) {
    let g = inst.weighted_means();
    let (arms, contexts) = g.shape();
    let revenue = |k: usize| -> Vec<(usize, f64)> { (0..contexts).map(|c| (lp::pair_var(arms, k, c), g[(k, c)])).collect() };
    for (k, &lambda) in inst.thresholds().iter().enumerate() {
        let mut lower = revenue(k);
        match slack_var {
            Some(j) => {
                lower.push((j, 1.0));
                prog.add_sparse(&lower, Sense::Ge, lambda);
            }
            None => {
                prog.add_sparse(&lower, Sense::Ge, lambda - fixed_s);
            }
        }
        if set.is_saturated(k) {
            let mut upper = revenue(k);
            match slack_var {
                Some(j) => {
                    upper.push((j, -1.0));
                    prog.add_sparse(&upper, Sense::Le, lambda);
                }
                None => {
                    prog.add_sparse(&upper, Sense::Le, lambda + fixed_s);
                }
            }
        }
    }
    for &(k, c) in set.zero_pairs() {
        prog.add_sparse(&[(lp::pair_var(arms, k, c), 1.0)], Sense::Eq, 0.0);
    }
    for c in 0..contexts {
        let terms: Vec<_> = (0..arms).map(|k| (lp::pair_var(arms, k, c), 1.0)).collect();
        prog.add_sparse(&terms, Sense::Eq, 1.0);
    }
}

/// `s(I) = min { s ≥ 0 : ψ(s, I) ≠ ∅ }`; `+∞` if the zero pairs alone
/// empty some context.
pub fn feasibility_gap(inst: &Instance, set: &ActiveSet, cfg: &OracleConfig) -> Result<f64, OracleError> {
    set.check_range(inst.arms(), inst.contexts())?;
    let n = inst.kappa();
    let mut prog = LinearProgram::new(n + 1);
    prog.set_objective_coeff(n, -1.0);
    add_relaxed_rows(&mut prog, inst, set, Some(n), 0.0);
    Ok(match solve_bounded(&prog, cfg)? {
        Some((x, _)) => x[n].max(0.0),
        None => f64::INFINITY,
    })
}

/// `z_I(s) = max { f(μ, w) : w ∈ ψ(s, I) }`, `None` if `ψ(s, I) = ∅`.
pub fn set_value(inst: &Instance, set: &ActiveSet, s: f64, cfg: &OracleConfig) -> Result<Option<f64>, OracleError> {
    set.check_range(inst.arms(), inst.contexts())?;
    let mut prog = LinearProgram::new(inst.kappa());
    prog.set_objective(inst.weighted_means().as_slice().to_vec());
    add_relaxed_rows(&mut prog, inst, set, None, s);
    Ok(solve_bounded(&prog, cfg)?.map(|(_, v)| v))
}

/// `L(I)`: steepest increase of `z_I` on `[s(I), s(I) + window]`.
pub fn set_sensitivity(inst: &Instance, set: &ActiveSet, s_of_set: f64, cfg: &OracleConfig) -> Result<f64, OracleError> {
    steepest_slope(
        |s| set_value(inst, set, s, cfg),
        s_of_set,
        s_of_set + cfg.set_window,
        Steep::Left,
        cfg.slope_grid,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetGap {
    pub set: ActiveSet,
    /// `s(I)`; infinite when `ψ(s, I)` is empty for every `s`.
    pub s: f64,
    /// `z_I(s(I))`.
    pub z: Option<f64>,
    /// `L(I)`.
    pub l: Option<f64>,
    /// `P(I) = (f* − z_I(s(I))) / (max(1, S_γ*) + L(I))`.
    pub p: Option<f64>,
    /// `ρ(I) = max(s(I), P(I))`.
    pub rho: f64,
}

/// Evaluates all gaps of one set.
pub fn suboptimality_gap(inst: &Instance, set: &ActiveSet, ctx: &GapContext, cfg: &OracleConfig) -> Result<SetGap, OracleError> {
    let s = feasibility_gap(inst, set, cfg)?;
    if !s.is_finite() {
        return Ok(SetGap {
            set: set.clone(),
            s,
            z: None,
            l: None,
            p: None,
            rho: f64::INFINITY,
        });
    }
    // The minimal slack sits on the boundary of feasibility; step off it if
    // the re-solve lands on the wrong side by round-off.
    let mut at = s;
    let mut z = None;
    for i in 0..4 {
        z = set_value(inst, set, at, cfg)?;
        if z.is_some() {
            break;
        }
        at = s + 1e-9 * (1.0 + s) * 10f64.powi(i);
    }
    let z = z.ok_or_else(|| OracleError::Contract(format!("relaxation of {set} empty just above s(I) = {s}")))?;
    let l = set_sensitivity(inst, set, at, cfg)?;
    let p = (ctx.f_star - z) / (ctx.normalizer + l);
    Ok(SetGap {
        set: set.clone(),
        s,
        z: Some(z),
        l: Some(l),
        p: Some(p),
        rho: s.max(p),
    })
}

/// Sets of size `κ − |C|` drawn from the `K` revenue constraints and the
/// `κ` non-negativity constraints, in lexicographic index order.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateFamily {
    pub sets: Vec<ActiveSet>,
    pub family_size: u128,
    pub complete: bool,
}

fn binomial(n: usize, r: usize) -> u128 {
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

pub fn candidate_family(arms: usize, contexts: usize, cap: usize) -> CandidateFamily {
    let kappa = arms * contexts;
    let size = kappa - contexts;
    let pool = arms + kappa;
    let family_size = binomial(pool, size);
    let sets: Vec<ActiveSet> = (0..pool)
        .combinations(size)
        .take(cap)
        .map(|idx| ActiveSet::from_constraint_indices(&idx, arms))
        .collect();
    CandidateFamily {
        complete: (sets.len() as u128) == family_size,
        family_size,
        sets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        assert_eq!(binomial(12, 6), 924);
        let fam = candidate_family(3, 3, 100_000);
        assert_eq!(fam.sets.len(), 924);
        assert!(fam.complete);
        let fam = candidate_family(2, 2, 100_000);
        assert_eq!(fam.sets.len(), 15);
        let capped = candidate_family(3, 3, 10);
        assert_eq!(capped.sets.len(), 10);
        assert!(!capped.complete);
        assert_eq!(capped.family_size, 924);
        // K = 1: the simplex rows fix w, so only the empty set is basis-sized.
        let single = candidate_family(1, 4, 10);
        assert_eq!(single.sets, vec![ActiveSet::empty()]);
    }

    #[test]
    fn family_sets_are_distinct() {
        let fam = candidate_family(3, 3, 100_000);
        let unique: std::collections::BTreeSet<_> = fam.sets.iter().collect();
        assert_eq!(unique.len(), fam.sets.len());
        assert!(fam.sets.iter().all(|s| s.len() == 6));
    }
}
