//! One-parameter sweeps over run configurations.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{RunConfig, SimError};
use crate::instance::{Instance, RewardModel};
use crate::oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Shift thresholds uniformly so the margin equals the value.
    GammaScale,
    /// Gaussian noise level.
    Sigma,
    Horizon,
}

impl FromStr for SweepParam {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gamma_scale" => Ok(SweepParam::GammaScale),
            "sigma" => Ok(SweepParam::Sigma),
            "horizon" => Ok(SweepParam::Horizon),
            other => Err(SimError::Config(format!(
                "unknown sweep parameter `{other}` (expected gamma_scale, sigma or horizon)"
            ))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::GammaScale => "gamma_scale",
            SweepParam::Sigma => "sigma",
            SweepParam::Horizon => "horizon",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// `None` when the point was skipped; see `skipped`.
    pub config: Option<RunConfig>,
    /// Margin of the (possibly modified) instance, recomputed.
    pub gamma_star: Option<f64>,
    pub skipped: Option<String>,
}

/// `λ' = λ + (γ* − target)`, which moves the margin to `target`. Fails if
/// some `λ'_k` would be negative.
pub fn gamma_target_instance(inst: &Instance, target: f64) -> Result<Instance, String> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(format!("target margin {target} must be a non-negative number"));
    }
    let gamma = oracle::feasibility_margin(inst).map_err(|e| e.to_string())?;
    let shift = gamma - target;
    let thresholds: Vec<f64> = inst.thresholds().iter().map(|l| l + shift).collect();
    if let Some(k) = thresholds.iter().position(|&l| l < 0.0) {
        return Err(format!(
            "target margin {target} needs lambda_{} = {} < 0 (instance margin is {gamma})",
            k + 1,
            thresholds[k]
        ));
    }
    inst.with_thresholds(thresholds)
        .map(|i| i.with_name(format!("{}[gamma={target}]", inst.name())))
        .map_err(|e| e.to_string())
}

/// Expands `base` into one configuration per value.
pub fn plan_sweep(base: &RunConfig, param: SweepParam, values: &[f64]) -> Vec<SweepPoint> {
    values
        .iter()
        .map(|&value| {
            let built: Result<RunConfig, String> = match param {
                SweepParam::GammaScale => gamma_target_instance(&base.instance, value).map(|instance| RunConfig {
                    instance,
                    ..base.clone()
                }),
                SweepParam::Sigma => base
                    .instance
                    .with_noise(RewardModel::Gaussian { sigma: value })
                    .map(|instance| RunConfig {
                        instance,
                        ..base.clone()
                    })
                    .map_err(|e| e.to_string()),
                SweepParam::Horizon if value >= 1.0 && value.fract() == 0.0 => Ok(RunConfig {
                    horizon: value as u64,
                    ..base.clone()
                }),
                SweepParam::Horizon => Err(format!("horizon {value} is not a positive integer")),
            };
            match built {
                Ok(config) => SweepPoint {
                    value,
                    gamma_star: oracle::feasibility_margin(&config.instance).ok(),
                    config: Some(config),
                    skipped: None,
                },
                Err(reason) => SweepPoint {
                    value,
                    config: None,
                    gamma_star: None,
                    skipped: Some(reason),
                },
            }
        })
        .collect()
}
