//! Problem instances: data model, validation and the JSON file format.

mod catalog;
mod random;

pub use catalog::{catalog, catalog_get, CatalogEntry, CatalogParam};
pub use random::{random_feasible_instance, RandomSpec};

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::PairMatrix;

/// Tolerance on `Σ_c p_c = 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance document: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("unknown catalog instance `{0}`")]
    UnknownCatalog(String),
    #[error("parameter {name} = {value} outside {range}")]
    ParamRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("no instance with margin >= {gamma_min} after {attempts} attempts")]
    Generation { gamma_min: f64, attempts: usize },
}

/// Reward distribution around the mean `μ_{k,c}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RewardModel {
    Gaussian { sigma: f64 },
    Bernoulli,
    Deterministic,
}

impl Default for RewardModel {
    fn default() -> Self {
        RewardModel::Gaussian { sigma: 1.0 }
    }
}

impl fmt::Display for RewardModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardModel::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            RewardModel::Bernoulli => f.write_str("bernoulli"),
            RewardModel::Deterministic => f.write_str("deterministic"),
        }
    }
}

/// A validated MAB-ARC instance. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    name: String,
    means: PairMatrix,
    probs: Vec<f64>,
    thresholds: Vec<f64>,
    noise: RewardModel,
    weighted: PairMatrix,
    source: Option<String>,
}

/// What a learner is allowed to see: context law, thresholds and noise
/// family, but not the means.
#[derive(Clone, Debug, PartialEq)]
pub struct PublicInfo {
    pub arms: usize,
    pub probs: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub noise: RewardModel,
}

impl PublicInfo {
    pub fn contexts(&self) -> usize {
        self.probs.len()
    }
}

impl Instance {
    /// Validates and builds an instance. `means[(k, c)]` is `μ_{k,c}`.
    pub fn new(
        name: impl Into<String>,
        means: PairMatrix,
        probs: Vec<f64>,
        thresholds: Vec<f64>,
        noise: RewardModel,
    ) -> Result<Self, InstanceError> {
        let (arms, contexts) = means.shape();
        let invalid = |msg: String| Err(InstanceError::Invalid(msg));
        if arms == 0 || contexts == 0 {
            return invalid("need at least one arm and one context".into());
        }
        if probs.len() != contexts {
            return invalid(format!("{} probabilities for {contexts} contexts", probs.len()));
        }
        if thresholds.len() != arms {
            return invalid(format!("{} thresholds for {arms} arms", thresholds.len()));
        }
        if let Some(c) = probs.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return invalid(format!("context {} has non-positive probability {}", c + 1, probs[c]));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > PROB_SUM_TOL {
            return invalid(format!("context probabilities sum to {mass}, not 1"));
        }
        if means.as_slice().iter().any(|v| !v.is_finite()) {
            return invalid("non-finite mean".into());
        }
        if thresholds.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite threshold".into());
        }
        match noise {
            RewardModel::Gaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => {
                return invalid(format!("gaussian sigma must be positive, got {sigma}"));
            }
            RewardModel::Bernoulli if means.as_slice().iter().any(|&m| !(0.0..=1.0).contains(&m)) => {
                return invalid("bernoulli means must lie in [0, 1]".into());
            }
            _ => {}
        }
        let weighted = means.scale_columns(&probs);
        Ok(Self {
            name: name.into(),
            means,
            probs,
            thresholds,
            noise,
            weighted,
            source: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arms(&self) -> usize {
        self.means.arms()
    }

    pub fn contexts(&self) -> usize {
        self.means.contexts()
    }

    /// `κ = K·|C|`.
    pub fn kappa(&self) -> usize {
        self.arms() * self.contexts()
    }

    pub fn means(&self) -> &PairMatrix {
        &self.means
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn noise(&self) -> RewardModel {
        self.noise
    }

    /// `G_{k,c} = p_c·μ_{k,c}`.
    pub fn weighted_means(&self) -> &PairMatrix {
        &self.weighted
    }

    /// Short description for built-in instances.
    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn public(&self) -> PublicInfo {
        PublicInfo {
            arms: self.arms(),
            probs: self.probs.clone(),
            thresholds: self.thresholds.clone(),
            noise: self.noise,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub(crate) fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn with_thresholds(&self, thresholds: Vec<f64>) -> Result<Self, InstanceError> {
        let mut out = Self::new(self.name.clone(), self.means.clone(), self.probs.clone(), thresholds, self.noise)?;
        out.source = self.source.clone();
        Ok(out)
    }

    pub fn with_noise(&self, noise: RewardModel) -> Result<Self, InstanceError> {
        let mut out = Self::new(self.name.clone(), self.means.clone(), self.probs.clone(), self.thresholds.clone(), noise)?;
        out.source = self.source.clone();
        Ok(out)
    }

    /// Multiplies means and thresholds by `factor`; every allocation keeps
    /// its feasibility status and all margins scale by `factor`. The name
    /// gains an `[x<factor>]` suffix.
    pub fn scaled(&self, factor: f64) -> Result<Self, InstanceError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(InstanceError::Invalid(format!("scale factor must be positive, got {factor}")));
        }
        let mut out = Self::new(
            format!("{}[x{factor}]", self.name),
            self.means.map(|v| v * factor),
            self.probs.clone(),
            self.thresholds.iter().map(|v| v * factor).collect(),
            self.noise,
        )?;
        out.source = self.source.clone();
        Ok(out)
    }

    /// Parses the JSON instance format.
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        doc.into_instance()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceDoc::from(self)).expect("instance serializes")
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (K={}, |C|={}, noise={})", self.name, self.arms(), self.contexts(), self.noise)?;
        writeln!(f, "p = {:?}", self.probs)?;
        writeln!(f, "lambda = {:?}", self.thresholds)?;
        write!(f, "weighted means p*mu:\n{}", self.weighted)
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Instance::from_json(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, inst.to_json() + "\n").map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A number written either as a JSON number or as a decimal string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Number(f64),
    Text(String),
}

impl Num {
    fn value(&self) -> Result<f64, InstanceError> {
        match self {
            Num::Number(v) => Ok(*v),
            Num::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| InstanceError::Parse(format!("`{s}` is not a decimal number"))),
        }
    }
}

impl From<f64> for Num {
    // Rust prints the shortest string that parses back to the same f64.
    fn from(v: f64) -> Self {
        Num::Text(v.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct ContextDoc {
    prob: Num,
    means: Vec<Num>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    name: String,
    arms: usize,
    thresholds: Vec<Num>,
    contexts: Vec<ContextDoc>,
    #[serde(default)]
    noise: RewardModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

impl InstanceDoc {
    fn into_instance(self) -> Result<Instance, InstanceError> {
        let values = |v: &[Num]| v.iter().map(Num::value).collect::<Result<Vec<_>, _>>();
        let mut columns = Vec::with_capacity(self.arms * self.contexts.len());
        let mut probs = Vec::with_capacity(self.contexts.len());
        for (c, ctx) in self.contexts.iter().enumerate() {
            let means = values(&ctx.means)?;
            if means.len() != self.arms {
                return Err(InstanceError::Invalid(format!(
                    "context {} lists {} means for {} arms",
                    c + 1,
                    means.len(),
                    self.arms
                )));
            }
            columns.extend(means);
            probs.push(ctx.prob.value()?);
        }
        let means = PairMatrix::from_context_major(self.arms, self.contexts.len(), columns)
            .filter(|m| m.arms() > 0 && m.contexts() > 0)
            .ok_or_else(|| InstanceError::Invalid("need at least one arm and one context".into()))?;
        let mut inst = Instance::new(self.name, means, probs, values(&self.thresholds)?, self.noise)?;
        inst.source = self.source;
        Ok(inst)
    }
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        InstanceDoc {
            name: inst.name.clone(),
            arms: inst.arms(),
            thresholds: inst.thresholds.iter().map(|&v| v.into()).collect(),
            contexts: (0..inst.contexts())
                .map(|c| ContextDoc {
                    prob: inst.probs[c].into(),
                    means: inst.means.column(c).iter().map(|&v| v.into()).collect(),
                })
                .collect(),
            noise: inst.noise,
            source: inst.source.clone(),
        }
    }
}
