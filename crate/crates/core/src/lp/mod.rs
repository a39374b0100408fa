//! Dense linear programs and an exact two-phase simplex solver.
//!
//! Problems here are small (tens of variables), so the solver favours
//! determinism and robustness over speed: a dense tableau, Bland's
//! anti-cycling rule, and explicit artificial variables for `=`/`≥` rows.

mod alloc;
mod simplex;

pub use alloc::{build_alloc_lp, build_opt_lp, objective_value, pair_var, revenue, revenues};

use thiserror::Error;

/// Constraint sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn flipped(self) -> Self {
        match self {
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
            Sense::Eq => Sense::Eq,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective·x` subject to linear constraints and variable bounds.
///
/// Lower bounds default to 0; upper bounds are optional.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<Option<f64>>,
}

impl LinearProgram {
    /// A program with `num_vars` non-negative variables and a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[Option<f64>] {
        &self.upper
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn set_objective_coeff(&mut self, var: usize, value: f64) -> &mut Self {
        self.objective[var] = value;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) -> &mut Self {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, sense, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: Option<f64>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    /// Checks the structural invariants: at least one variable, every
    /// constraint of length `num_vars`, and finite data throughout.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(LpError::NoVariables);
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch {
                what: "bounds",
                expected: n,
                found: self.lower.len().min(self.upper.len()),
            });
        }
        if let Some(j) = self.objective.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFinite { what: "objective", index: j });
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::DimensionMismatch {
                    what: "constraint",
                    expected: n,
                    found: c.coeffs.len(),
                });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite { what: "constraint", index: i });
            }
        }
        if let Some(j) = self.lower.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFinite { what: "lower bound", index: j });
        }
        if let Some(j) = self.upper.iter().position(|u| u.is_some_and(|v| !v.is_finite())) {
            return Err(LpError::NonFinite { what: "upper bound", index: j });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Primal feasibility tolerance.
    pub tol_feas: f64,
    /// Smallest magnitude accepted as a pivot element.
    pub tol_pivot: f64,
    /// Reduced-cost threshold for entering candidates.
    pub tol_opt: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-9,
            tol_pivot: 1e-10,
            tol_opt: 1e-10,
            max_pivots: 50_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
///
/// Dual values follow the shadow-price convention: `dual_values[i]` is the
/// derivative of the optimal objective with respect to the right-hand side of
/// constraint `i`, so it is `≥ 0` for `≤` rows, `≤ 0` for `≥` rows and free
/// for `=` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal solution, present iff `status == Optimal`.
    pub x: Option<Vec<f64>>,
    /// Optimal value; `-inf` when infeasible, `+inf` when unbounded.
    pub objective_value: f64,
    /// One multiplier per user constraint (empty unless optimal).
    pub dual_values: Vec<f64>,
    /// Multipliers of the upper bounds, zero where a variable has none.
    pub bound_duals: Vec<f64>,
    /// `c_j - a_jᵀy - z_j` per structural variable; `≤ 0` at optimality.
    pub reduced_costs: Vec<f64>,
    /// Basic columns of the standard form: structural variables are
    /// `0..num_vars`, then one logical column per constraint row, then one
    /// per upper bound.
    pub basis: Vec<usize>,
    /// Phase-one residual (sum of artificial values). Positive for
    /// infeasible programs, where it serves as the certificate.
    pub infeasibility: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program has no variables")]
    NoVariables,
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {what} #{index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),
    #[error("active set references arm {arm} / context {context} outside a {arms}x{contexts} instance")]
    ActiveSetOutOfRange {
        arm: usize,
        context: usize,
        arms: usize,
        contexts: usize,
    },
}

/// Solves `lp` with default tolerances.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    simplex::solve(lp, opts)
}
