//! Online allocation rules.
//!
//! Each round a policy maps the current [`ConfidenceState`] to a full
//! allocation matrix `w(t)`; the simulator then samples the arm from the
//! column of the observed context.

mod state;

pub use state::{confidence_radius, BoundMatrices, ConfidenceState};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::active_set::ActiveSet;
use crate::allocation::Allocation;
use crate::instance::PublicInfo;
use crate::lp::{self, LinearProgram, LpStatus, Sense, SimplexOptions};
use crate::matrix::PairMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Olp,
    Oplp,
    Greedy,
    #[serde(rename = "noncontextual")]
    NonContextual,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Olp, Algorithm::Oplp, Algorithm::Greedy, Algorithm::NonContextual];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Olp => "olp",
            Algorithm::Oplp => "oplp",
            Algorithm::Greedy => "greedy",
            Algorithm::NonContextual => "noncontextual",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| PolicyError::UnknownAlgorithm(s.to_string()))
    }
}

/// Which program produced the allocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    OptimisticLP,
    PessimisticLP,
    Fallback,
    Greedy,
    NonContextual,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::OptimisticLP => "optimistic",
            Mode::PessimisticLP => "pessimistic",
            Mode::Fallback => "fallback",
            Mode::Greedy => "greedy",
            Mode::NonContextual => "noncontextual",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("confidence level delta must be in (0, 1], got {0}")]
    Delta(f64),
    #[error("unknown algorithm `{0}` (expected olp, oplp, greedy or noncontextual)")]
    UnknownAlgorithm(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyConfig {
    /// Radius used for unvisited pairs, where the formula diverges.
    pub m_cap: f64,
    /// Membership tolerance for the diagnostic active-set guess.
    pub tol_act: f64,
    pub simplex: SimplexOptions,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            m_cap: 1e3,
            tol_act: 1e-7,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `Σ_{k,c} 2 ε_{k,c} w_{k,c}`.
    pub rho_radius: f64,
    /// Binding constraints of the surrogate program at `w(t)`.
    pub active_set_guess: ActiveSet,
    /// `min_k g_k(cons, w(t)) − λ_k` for the constraint means `cons` the
    /// chosen program used (LCB in pessimistic mode, UCB in optimistic mode).
    pub surrogate_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolicyDecision {
    pub allocation: Allocation,
    pub mode: Mode,
    pub pessimistic_feasible: bool,
    pub diagnostics: Diagnostics,
}

/// Slack tolerated on the fallback's second stage.
const FALLBACK_SLACK: f64 = 1e-9;

fn weighted(info: &PublicInfo, m: &PairMatrix) -> PairMatrix {
    m.scale_columns(&info.probs)
}

/// Solves `LP(obj, cons)`; `None` if infeasible or the solver fails.
fn solve_alloc(obj: &PairMatrix, cons: &PairMatrix, thresholds: &[f64], cfg: &PolicyConfig) -> Option<Allocation> {
    let prog = lp::build_alloc_lp(obj, cons, thresholds).ok()?;
    let sol = lp::solve_lp_with(&prog, &cfg.simplex).ok()?;
    if sol.status != LpStatus::Optimal {
        return None;
    }
    Allocation::from_lp(sol.x.as_ref()?, obj.arms(), obj.contexts()).ok()
}

/// Lexicographic shortfall fallback: find the least uniform relaxation `s*`
/// making the constraints feasible, then maximize the objective within it.
/// Falls back to uniform play if the solver itself fails.
fn fallback(obj: &PairMatrix, cons: &PairMatrix, thresholds: &[f64], cfg: &PolicyConfig) -> Allocation {
    let (arms, contexts) = obj.shape();
    let n = arms * contexts;
    let mut prog = LinearProgram::new(n + 1);
    prog.set_objective_coeff(n, -1.0);
    for (k, &lambda) in thresholds.iter().enumerate() {
        let mut terms: Vec<_> = (0..contexts).map(|c| (lp::pair_var(arms, k, c), cons[(k, c)])).collect();
        terms.push((n, 1.0));
        prog.add_sparse(&terms, Sense::Ge, lambda);
    }
    for c in 0..contexts {
        let terms: Vec<_> = (0..arms).map(|k| (lp::pair_var(arms, k, c), 1.0)).collect();
        prog.add_sparse(&terms, Sense::Eq, 1.0);
    }
    let shortfall = match lp::solve_lp_with(&prog, &cfg.simplex) {
        Ok(sol) if sol.is_optimal() => sol.x.expect("optimal has x")[n].max(0.0),
        _ => return Allocation::uniform(arms, contexts),
    };
    let relaxed: Vec<f64> = thresholds.iter().map(|l| l - shortfall - FALLBACK_SLACK).collect();
    solve_alloc(obj, cons, &relaxed, cfg).unwrap_or_else(|| Allocation::uniform(arms, contexts))
}

fn decision(
    allocation: Allocation,
    mode: Mode,
    pessimistic_feasible: bool,
    cons: &PairMatrix,
    bounds: &BoundMatrices,
    info: &PublicInfo,
    cfg: &PolicyConfig,
) -> PolicyDecision {
    let g = allocation.revenues(cons);
    let surrogate_slack = g
        .iter()
        .zip(&info.thresholds)
        .map(|(g, l)| g - l)
        .fold(f64::INFINITY, f64::min);
    let saturated = (0..info.arms).filter(|&k| (g[k] - info.thresholds[k]).abs() <= cfg.tol_act);
    let zeros = allocation.matrix().iter_pairs().filter(|&(_, v)| v <= cfg.tol_act).map(|(kc, _)| kc);
    PolicyDecision {
        diagnostics: Diagnostics {
            rho_radius: 2.0 * bounds.epsilon.dot(allocation.matrix()),
            active_set_guess: ActiveSet::new(saturated, zeros),
            surrogate_slack,
        },
        allocation,
        mode,
        pessimistic_feasible,
    }
}

fn optimistic(ucb: &PairMatrix, bounds: &BoundMatrices, info: &PublicInfo, cfg: &PolicyConfig, pessimistic_feasible: bool) -> PolicyDecision {
    let (allocation, mode) = match solve_alloc(ucb, ucb, &info.thresholds, cfg) {
        Some(w) => (w, Mode::OptimisticLP),
        None => (fallback(ucb, ucb, &info.thresholds, cfg), Mode::Fallback),
    };
    decision(allocation, mode, pessimistic_feasible, ucb, bounds, info, cfg)
}

/// Solves `LP(UCB, UCB)` with `δ = 1/t`.
pub fn olp_step(state: &ConfidenceState, info: &PublicInfo, cfg: &PolicyConfig) -> PolicyDecision {
    decide(Algorithm::Olp, state, info, cfg)
}

/// Solves `LP(UCB, LCB)` when feasible, otherwise `LP(UCB, UCB)`.
pub fn oplp_step(state: &ConfidenceState, info: &PublicInfo, cfg: &PolicyConfig) -> PolicyDecision {
    decide(Algorithm::Oplp, state, info, cfg)
}

/// Plug-in rule on empirical means; unvisited pairs count as zero.
pub fn greedy_step(state: &ConfidenceState, info: &PublicInfo, cfg: &PolicyConfig) -> PolicyDecision {
    decide(Algorithm::Greedy, state, info, cfg)
}

/// Context-independent revenue-ratio mixture built from aggregate UCBs.
pub fn noncontextual_step(state: &ConfidenceState, info: &PublicInfo, cfg: &PolicyConfig) -> PolicyDecision {
    decide(Algorithm::NonContextual, state, info, cfg)
}

/// One round of `alg` at the state's current round, `δ = 1/t`.
pub fn decide(alg: Algorithm, state: &ConfidenceState, info: &PublicInfo, cfg: &PolicyConfig) -> PolicyDecision {
    let bounds = state.bounds_at_round(cfg.m_cap);
    decide_with(alg, &bounds, &state.mean_matrix(), info, cfg)
}

/// One round of `alg` from explicit (unweighted) bound matrices and
/// empirical means.
pub fn decide_with(
    alg: Algorithm,
    bounds: &BoundMatrices,
    mu_hat: &PairMatrix,
    info: &PublicInfo,
    cfg: &PolicyConfig,
) -> PolicyDecision {
    let ucb = weighted(info, &bounds.ucb);
    match alg {
        Algorithm::Olp => optimistic(&ucb, bounds, info, cfg, false),
        Algorithm::Oplp => {
            let lcb = weighted(info, &bounds.lcb);
            match solve_alloc(&ucb, &lcb, &info.thresholds, cfg) {
                Some(w) => decision(w, Mode::PessimisticLP, true, &lcb, bounds, info, cfg),
                None => optimistic(&ucb, bounds, info, cfg, false),
            }
        }
        Algorithm::Greedy => {
            let mu_hat = weighted(info, mu_hat);
            let (allocation, mode) = match solve_alloc(&mu_hat, &mu_hat, &info.thresholds, cfg) {
                Some(w) => (w, Mode::Greedy),
                None => (fallback(&mu_hat, &mu_hat, &info.thresholds, cfg), Mode::Fallback),
            };
            decision(allocation, mode, false, &mu_hat, bounds, info, cfg)
        }
        Algorithm::NonContextual => {
            let q = revenue_ratio_mixture(&ucb, &info.thresholds);
            let allocation = Allocation::constant_columns(&q, info.contexts()).expect("mixture is a distribution");
            decision(allocation, Mode::NonContextual, false, &ucb, bounds, info, cfg)
        }
    }
}

/// `q_k = λ_k / m_k` with `m_k = Σ_c G_{k,c}`; leftover mass goes to the
/// largest `m_k` and an over-full vector is rescaled onto the simplex.
pub fn revenue_ratio_mixture(weighted_means: &PairMatrix, thresholds: &[f64]) -> Vec<f64> {
    let arms = weighted_means.arms();
    let m: Vec<f64> = (0..arms).map(|k| weighted_means.row(k).iter().sum()).collect();
    let mut q: Vec<f64> = m
        .iter()
        .zip(thresholds)
        .map(|(&mk, &l)| if mk > 0.0 && l > 0.0 { l / mk } else { 0.0 })
        .collect();
    let total: f64 = q.iter().sum();
    if total > 1.0 {
        q.iter_mut().for_each(|v| *v /= total);
    } else {
        let best = (0..arms).fold(0, |b, k| if m[k] > m[b] { k } else { b });
        q[best] += 1.0 - total;
    }
    q
}
