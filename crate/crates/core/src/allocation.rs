//! Column-stochastic allocation matrices.

use serde::{Deserialize, Serialize};

use crate::lp;
use crate::matrix::PairMatrix;

/// Column-sum tolerance of a valid allocation.
pub const COLUMN_TOL: f64 = 1e-9;
/// Entry slack accepted before clamping to `[0, 1]`.
pub const ENTRY_TOL: f64 = 1e-12;

/// `w_{k,c}` = probability of playing arm `k` in context `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairMatrix", into = "PairMatrix")]
pub struct Allocation {
    w: PairMatrix,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AllocationError {
    #[error("column {context} sums to {sum}")]
    ColumnSum { context: usize, sum: f64 },
    #[error("entry ({arm}, {context}) = {value} is outside [0, 1]")]
    Entry { arm: usize, context: usize, value: f64 },
}

impl Allocation {
    /// Validates `w` and clamps entries to `[0, 1]`.
    pub fn new(w: PairMatrix) -> Result<Self, AllocationError> {
        for ((k, c), v) in w.iter_pairs() {
            if !(-ENTRY_TOL..=1.0 + ENTRY_TOL).contains(&v) {
                return Err(AllocationError::Entry { arm: k, context: c, value: v });
            }
        }
        for c in 0..w.contexts() {
            let sum: f64 = w.column(c).iter().sum();
            if (sum - 1.0).abs() > COLUMN_TOL {
                return Err(AllocationError::ColumnSum { context: c, sum });
            }
        }
        Ok(Self { w: w.map(|v| v.clamp(0.0, 1.0)) })
    }

    /// Reads the first `arms·contexts` LP variables as an allocation. Solver
    /// round-off is clamped away; structural errors still fail validation.
    pub fn from_lp(x: &[f64], arms: usize, contexts: usize) -> Result<Self, AllocationError> {
        let w = PairMatrix::from_context_major(arms, contexts, x[..arms * contexts].to_vec()).expect("length checked by slice");
        // Simplex output sits within tol_feas of the polytope; snap tiny
        // negatives before the strict entry check.
        Self::new(w.map(|v| if v < 0.0 && v > -1e-9 { 0.0 } else { v }))
    }

    pub fn uniform(arms: usize, contexts: usize) -> Self {
        Self {
            w: PairMatrix::filled(arms, contexts, 1.0 / arms as f64),
        }
    }

    /// The same distribution `q` in every context.
    pub fn constant_columns(q: &[f64], contexts: usize) -> Result<Self, AllocationError> {
        Self::new(PairMatrix::from_fn(q.len(), contexts, |k, _| q[k]))
    }

    pub fn matrix(&self) -> &PairMatrix {
        &self.w
    }

    pub fn get(&self, k: usize, c: usize) -> f64 {
        self.w[(k, c)]
    }

    pub fn arms(&self) -> usize {
        self.w.arms()
    }

    pub fn contexts(&self) -> usize {
        self.w.contexts()
    }

    /// `f(μ, w)` for weighted means.
    pub fn objective(&self, weighted: &PairMatrix) -> f64 {
        lp::objective_value(weighted, &self.w)
    }

    /// `g_k(μ, w)` for weighted means.
    pub fn revenues(&self, weighted: &PairMatrix) -> Vec<f64> {
        lp::revenues(weighted, &self.w)
    }

    pub fn max_column_error(&self) -> f64 {
        (0..self.contexts())
            .map(|c| (self.w.column(c).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<PairMatrix> for Allocation {
    type Error = AllocationError;

    fn try_from(w: PairMatrix) -> Result<Self, Self::Error> {
        Self::new(w)
    }
}

impl From<Allocation> for PairMatrix {
    fn from(a: Allocation) -> Self {
        a.w
    }
}

impl std::fmt::Display for Allocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.w.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = PairMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 0.5]]).unwrap();
        assert!(Allocation::new(ok).is_ok());
        let bad_sum = PairMatrix::from_rows(&[vec![1.0, 0.5], vec![0.1, 0.5]]).unwrap();
        assert!(matches!(Allocation::new(bad_sum), Err(AllocationError::ColumnSum { context: 0, .. })));
        let negative = PairMatrix::from_rows(&[vec![1.5, 0.5], vec![-0.5, 0.5]]).unwrap();
        assert!(matches!(Allocation::new(negative), Err(AllocationError::Entry { .. })));
    }

    #[test]
    fn clamps_round_off() {
        let a = Allocation::from_lp(&[1.0 + 1e-13, -1e-13, 0.5, 0.5], 2, 2).unwrap();
        assert_eq!(a.get(0, 0), 1.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let a = Allocation::uniform(2, 3);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<Allocation>(&json).unwrap(), a);
        assert!(serde_json::from_str::<Allocation>("[[1.0],[1.0]]").is_err());
    }
}
