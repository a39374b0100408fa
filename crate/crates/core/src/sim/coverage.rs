//! Empirical coverage of the confidence set.

use rayon::prelude::*;
use serde::Serialize;

use super::{EpisodeRunner, SimError};
use crate::instance::Instance;
use crate::policy::{Algorithm, PolicyConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageConfig {
    pub algorithm: Algorithm,
    pub epochs: u64,
    pub base_seed: u64,
    /// Rounds at which coverage is checked, before the round is played.
    pub checkpoints: Vec<u64>,
    pub policy: PolicyConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageRow {
    pub t: u64,
    pub covered: u64,
    pub epochs: u64,
    pub fraction: f64,
    /// `1 − δ_t` with `δ_t = 1/t`.
    pub target: f64,
    /// Binomial standard error of the fraction at the target rate.
    pub stderr: f64,
    /// `target − 3·stderr`.
    pub gate: f64,
}

impl CoverageRow {
    pub fn passes(&self) -> bool {
        self.fraction >= self.gate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageTable {
    pub instance: String,
    pub rows: Vec<CoverageRow>,
}

/// All visited pairs satisfy `|μ̂ − μ| ≤ ε` at the decision moment.
fn covered(runner: &EpisodeRunner, inst: &Instance, m_cap: f64) -> bool {
    let state = runner.state();
    let bounds = state.bounds_at_round(m_cap);
    inst.means()
        .iter_pairs()
        .filter(|&((k, c), _)| state.count(k, c) > 0)
        .all(|((k, c), mu)| (state.mean(k, c).expect("visited") - mu).abs() <= bounds.epsilon[(k, c)])
}

/// For each checkpoint `t`, the fraction of epochs whose round-`t`
/// confidence set contains the true means.
pub fn coverage_experiment(inst: &Instance, cfg: &CoverageConfig) -> Result<CoverageTable, SimError> {
    if cfg.epochs == 0 || cfg.checkpoints.is_empty() || cfg.checkpoints.contains(&0) {
        return Err(SimError::Config("coverage needs epochs ≥ 1 and checkpoints ≥ 1".into()));
    }
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let last = *checkpoints.last().expect("non-empty");
    // Validates feasibility once up front.
    EpisodeRunner::planned(inst, cfg.algorithm, cfg.base_seed, 0, cfg.policy)?;
    let hits: Vec<Vec<bool>> = (0..cfg.epochs)
        .into_par_iter()
        .map(|epoch| {
            let mut runner =
                EpisodeRunner::planned(inst, cfg.algorithm, cfg.base_seed, epoch, cfg.policy).expect("checked above");
            let mut out = Vec::with_capacity(checkpoints.len());
            for t in 1..=last {
                if checkpoints.binary_search(&t).is_ok() {
                    out.push(covered(&runner, inst, cfg.policy.m_cap));
                }
                if t < last {
                    runner.step();
                }
            }
            out
        })
        .collect();
    let rows = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let count = hits.iter().filter(|h| h[i]).count() as u64;
            let target = 1.0 - 1.0 / t as f64;
            let stderr = (target * (1.0 - target) / cfg.epochs as f64).sqrt();
            CoverageRow {
                t,
                covered: count,
                epochs: cfg.epochs,
                fraction: count as f64 / cfg.epochs as f64,
                target,
                stderr,
                gate: target - 3.0 * stderr,
            }
        })
        .collect();
    Ok(CoverageTable {
        instance: inst.name().to_string(),
        rows,
    })
}
