//! Built-in instances.
//!
//! Tables are given as weighted means `G = p·μ`. Contexts are uniform, so
//! each entry is stored as `μ = |C|·G` with `p_c = 1/|C|`.

use super::{Instance, InstanceError, RewardModel};
use crate::matrix::PairMatrix;

/// Optional scalar parameter of a catalog entry.
#[derive(Clone, Copy, Debug)]
pub struct CatalogParam {
    pub name: &'static str,
    pub default: f64,
    /// Human-readable admissible range.
    pub range: &'static str,
    admits: fn(f64) -> bool,
}

impl CatalogParam {
    pub fn admits(&self, v: f64) -> bool {
        (self.admits)(v)
    }
}

/// Means (arm-major) and thresholds.
type Table = (Vec<Vec<f64>>, Vec<f64>);

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub param: Option<CatalogParam>,
    build: fn(f64) -> Table,
}

const EPS: CatalogParam = CatalogParam {
    name: "eps",
    default: 0.1,
    range: "[0, 0.25)",
    admits: |e| (0.0..0.25).contains(&e),
};

const EPS_PRIME: CatalogParam = CatalogParam {
    name: "eps",
    default: 0.5,
    range: "(0, 1]",
    admits: |e| e > 0.0 && e <= 1.0,
};

fn nominal(g22: f64, g13: f64) -> Table {
    (
        vec![vec![3.0, 1.0, g13], vec![0.0, g22, 0.0], vec![0.0, 0.0, 2.0]],
        vec![1.0, 0.25, 1.0],
    )
}

static CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "nu0",
        description: "3x3 nominal lower-bound instance; arm 2 saturates",
        param: None,
        build: |_| nominal(0.5, 1.0),
    },
    CatalogEntry {
        name: "nu_plus",
        description: "nominal instance with G[2][2] = (1+eps)/2",
        param: Some(EPS),
        build: |e| nominal((1.0 + e) / 2.0, 1.0),
    },
    CatalogEntry {
        name: "nu_minus",
        description: "nominal instance with G[2][2] = (1-eps)/2",
        param: Some(EPS),
        build: |e| nominal((1.0 - e) / 2.0, 1.0),
    },
    CatalogEntry {
        name: "nu_prime_lb",
        description: "nominal instance with G[1][3] = 2+eps; arms 2 and 3 saturate",
        param: Some(EPS_PRIME),
        build: |e| nominal(0.5, 2.0 + e),
    },
    CatalogEntry {
        name: "nu_sim",
        description: "3x3 simulation instance; arms 2 and 3 saturate",
        param: None,
        build: |_| {
            (
                vec![vec![3.0, 1.0, 2.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 1.0]],
                vec![1.0, 0.25, 0.5],
            )
        },
    },
    CatalogEntry {
        name: "nu_prime_ns",
        description: "3x3 simulation instance where no arm saturates",
        param: None,
        build: |_| {
            (
                vec![vec![3.0, 1.0, 1.0], vec![0.0, 3.0, 1.0], vec![1.0, 1.0, 3.0]],
                vec![1.0, 1.0, 1.0],
            )
        },
    },
    CatalogEntry {
        name: "greedy_ce",
        description: "2x2 instance on which the greedy plug-in rule can lock onto a wrong vertex",
        param: None,
        build: |_| (vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![0.1, 0.1]),
    },
];

/// All built-in entries, in a fixed order.
pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}

/// Builds a catalog instance. `param` defaults to the entry's default and is
/// rejected for entries without a parameter.
pub fn catalog_get(name: &str, param: Option<f64>) -> Result<Instance, InstanceError> {
    let entry = CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| InstanceError::UnknownCatalog(name.to_string()))?;
    let value = match (entry.param, param) {
        (Some(p), Some(v)) if !p.admits(v) => {
            return Err(InstanceError::ParamRange {
                name: p.name,
                value: v,
                range: p.range,
            })
        }
        (Some(_), Some(v)) => v,
        (Some(p), None) => p.default,
        (None, Some(v)) => {
            return Err(InstanceError::ParamRange {
                name: "eps",
                value: v,
                range: "none (instance takes no parameter)",
            })
        }
        (None, None) => 0.0,
    };
    let (table, thresholds) = (entry.build)(value);
    let contexts = table[0].len();
    let n = contexts as f64;
    let means = PairMatrix::from_rows(&table).expect("catalog tables are rectangular").map(|g| g * n);
    let probs = vec![1.0 / n; contexts];
    let label = match entry.param {
        Some(p) => format!("{}({}={})", entry.name, p.name, value),
        None => entry.name.to_string(),
    };
    Ok(Instance::new(label, means, probs, thresholds, RewardModel::default())?.with_source(entry.description))
}
