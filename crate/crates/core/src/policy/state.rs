//! Empirical means and confidence radii.

use serde::Serialize;

use super::PolicyError;
use crate::matrix::PairMatrix;

/// Sufficient statistics of the history before round `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceState {
    counts: Vec<u64>,
    sums: PairMatrix,
    t: u64,
}

/// Radii and bounds, entrywise `ucb = μ̂ + ε`, `lcb = μ̂ − ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundMatrices {
    pub epsilon: PairMatrix,
    pub ucb: PairMatrix,
    pub lcb: PairMatrix,
}

impl BoundMatrices {
    /// Zero-radius bounds at known means.
    pub fn exact(means: &PairMatrix) -> Self {
        Self {
            epsilon: PairMatrix::zeros(means.arms(), means.contexts()),
            ucb: means.clone(),
            lcb: means.clone(),
        }
    }

    /// Whether `|μ̂ − μ| ≤ ε` for every pair, i.e. `lcb ≤ μ ≤ ucb`.
    pub fn contains(&self, means: &PairMatrix) -> bool {
        means
            .as_slice()
            .iter()
            .zip(self.lcb.as_slice().iter().zip(self.ucb.as_slice()))
            .all(|(m, (lo, hi))| lo <= m && m <= hi)
    }
}

/// `ε = sqrt(2 ln(2κ/δ) / n)`, or `m_cap` when `n = 0`.
pub fn confidence_radius(n: u64, kappa: usize, delta: f64, m_cap: f64) -> f64 {
    if n == 0 {
        m_cap
    } else {
        (2.0 * (2.0 * kappa as f64 / delta).ln() / n as f64).sqrt()
    }
}

impl ConfidenceState {
    /// Empty history; the first decision happens at `t = 1`.
    pub fn new(arms: usize, contexts: usize) -> Self {
        Self {
            counts: vec![0; arms * contexts],
            sums: PairMatrix::zeros(arms, contexts),
            t: 1,
        }
    }

    pub fn arms(&self) -> usize {
        self.sums.arms()
    }

    pub fn contexts(&self) -> usize {
        self.sums.contexts()
    }

    pub fn kappa(&self) -> usize {
        self.counts.len()
    }

    /// Index of the round about to be played.
    pub fn round(&self) -> u64 {
        self.t
    }

    /// Records reward `r` for arm `k` in context `c` and advances the round.
    pub fn update(&mut self, k: usize, c: usize, r: f64) {
        assert!(k < self.arms() && c < self.contexts(), "pair ({k}, {c}) out of range");
        let arms = self.arms();
        self.counts[c * arms + k] += 1;
        self.sums[(k, c)] += r;
        self.t += 1;
    }

    pub fn count(&self, k: usize, c: usize) -> u64 {
        self.counts[c * self.arms() + k]
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn reward_sum(&self, k: usize, c: usize) -> f64 {
        self.sums[(k, c)]
    }

    pub fn mean(&self, k: usize, c: usize) -> Option<f64> {
        let n = self.count(k, c);
        (n > 0).then(|| self.sums[(k, c)] / n as f64)
    }

    /// Empirical means, zero where a pair has not been observed.
    pub fn mean_matrix(&self) -> PairMatrix {
        PairMatrix::from_fn(self.arms(), self.contexts(), |k, c| self.mean(k, c).unwrap_or(0.0))
    }

    pub fn bounds(&self, delta: f64, m_cap: f64) -> Result<BoundMatrices, PolicyError> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(PolicyError::Delta(delta));
        }
        let kappa = self.kappa();
        let epsilon = PairMatrix::from_fn(self.arms(), self.contexts(), |k, c| {
            confidence_radius(self.count(k, c), kappa, delta, m_cap)
        });
        let mu_hat = self.mean_matrix();
        Ok(BoundMatrices {
            ucb: mu_hat.zip_map(&epsilon, |m, e| m + e),
            lcb: mu_hat.zip_map(&epsilon, |m, e| m - e),
            epsilon,
        })
    }

    /// Bounds with the schedule `δ = 1/t`.
    pub fn bounds_at_round(&self, m_cap: f64) -> BoundMatrices {
        self.bounds(1.0 / self.t as f64, m_cap).expect("1/t lies in (0, 1]")
    }
}
