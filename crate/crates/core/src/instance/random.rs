//! Random strictly feasible instances for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, InstanceError, RewardModel};
use crate::matrix::PairMatrix;
use crate::oracle::{self, OracleConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub arms: usize,
    pub contexts: usize,
    /// Means are drawn uniformly from `[lo, hi]`.
    pub mean_bounds: (f64, f64),
    /// Reject instances whose feasibility margin is below this.
    pub gamma_min: f64,
    /// Also reject instances whose optimum the oracle flags as degenerate.
    pub nondegenerate: bool,
    pub max_attempts: usize,
    pub noise: RewardModel,
}

impl RandomSpec {
    pub fn new(arms: usize, contexts: usize) -> Self {
        Self {
            arms,
            contexts,
            mean_bounds: (0.0, 1.0),
            gamma_min: 0.0,
            nondegenerate: false,
            max_attempts: 1000,
            noise: RewardModel::default(),
        }
    }
}

fn draw(spec: &RandomSpec, rng: &mut ChaCha8Rng) -> Result<Instance, InstanceError> {
    let (lo, hi) = spec.mean_bounds;
    let means = PairMatrix::from_fn(spec.arms, spec.contexts, |_, _| rng.random_range(lo..=hi));
    // Context weights in [0.5, 1.5] keep every probability comfortably positive.
    let raw: Vec<f64> = (0..spec.contexts).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = probs[..spec.contexts - 1].iter().sum();
    probs[spec.contexts - 1] = 1.0 - head;
    // λ_k ≤ R_k / (2K): splitting every context evenly earns R_k / K ≥ 2λ_k.
    let thresholds = (0..spec.arms)
        .map(|k| {
            let reach: f64 = (0..spec.contexts).map(|c| probs[c] * means[(k, c)].max(0.0)).sum();
            rng.random_range(0.0..=1.0) * reach / (2.0 * spec.arms as f64)
        })
        .collect();
    Instance::new("random", means, probs, thresholds, spec.noise)
}

/// Rejection-samples an instance with feasibility margin `≥ gamma_min`.
/// Deterministic in `seed`.
pub fn random_feasible_instance(spec: &RandomSpec, seed: u64) -> Result<Instance, InstanceError> {
    if spec.arms == 0 || spec.contexts == 0 {
        return Err(InstanceError::Invalid("need at least one arm and one context".into()));
    }
    let (lo, hi) = spec.mean_bounds;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(InstanceError::Invalid(format!("bad mean bounds [{lo}, {hi}]")));
    }
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..spec.max_attempts {
        let inst = draw(spec, &mut rng)?;
        let Ok(margin) = oracle::feasibility_margin(&inst) else {
            continue;
        };
        if margin < spec.gamma_min {
            continue;
        }
        if spec.nondegenerate {
            match oracle::optimal_allocation(&inst, &cfg) {
                Ok(plan) if !plan.degenerate => {}
                _ => continue,
            }
        }
        return Ok(inst.with_name(format!("random-{seed}-{attempt}")));
    }
    Err(InstanceError::Generation {
        gamma_min: spec.gamma_min,
        attempts: spec.max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_deterministic() {
        let spec = RandomSpec::new(3, 3);
        assert_eq!(random_feasible_instance(&spec, 42).unwrap(), random_feasible_instance(&spec, 42).unwrap());
        assert_ne!(random_feasible_instance(&spec, 42).unwrap(), random_feasible_instance(&spec, 43).unwrap());
    }

    #[test]
    fn single_pair_instances_are_feasible() {
        let spec = RandomSpec {
            mean_bounds: (0.2, 1.0),
            ..RandomSpec::new(1, 1)
        };
        for seed in 0..20 {
            let inst = random_feasible_instance(&spec, seed).unwrap();
            let mu = inst.means()[(0, 0)];
            assert!(inst.thresholds()[0] <= mu / 2.0 + 1e-15);
            let margin = oracle::feasibility_margin(&inst).unwrap();
            assert!(margin >= mu / 2.0 - 1e-12);
        }
    }

    #[test]
    fn unattainable_margin_fails() {
        let spec = RandomSpec {
            gamma_min: 5.0,
            max_attempts: 10,
            ..RandomSpec::new(2, 2)
        };
        assert!(matches!(random_feasible_instance(&spec, 0), Err(InstanceError::Generation { .. })));
    }
}
