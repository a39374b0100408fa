//! Candidate sets of saturated constraints.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lp::LpError;

/// A set `I` of binding constraints: arms whose revenue constraint holds
/// with equality, and `(arm, context)` pairs whose allocation is zero.
///
/// Indices are 0-based in Rust. The serialized form and `Display` are
/// 1-based, matching how allocation tables are usually written.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActiveSet {
    saturated: BTreeSet<usize>,
    zeros: BTreeSet<(usize, usize)>,
}

impl ActiveSet {
    pub fn new(saturated: impl IntoIterator<Item = usize>, zeros: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            saturated: saturated.into_iter().collect(),
            zeros: zeros.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from 1-based labels.
    pub fn from_one_based(saturated: &[usize], zeros: &[(usize, usize)]) -> Self {
        Self::new(
            saturated.iter().map(|k| k - 1),
            zeros.iter().map(|&(k, c)| (k - 1, c - 1)),
        )
    }

    pub fn saturated_arms(&self) -> &BTreeSet<usize> {
        &self.saturated
    }

    pub fn zero_pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.zeros
    }

    pub fn is_saturated(&self, k: usize) -> bool {
        self.saturated.contains(&k)
    }

    pub fn is_zero(&self, k: usize, c: usize) -> bool {
        self.zeros.contains(&(k, c))
    }

    /// `|𝒦∩I| + |𝒥∩I|`.
    pub fn len(&self) -> usize {
        self.saturated.len() + self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check_range(&self, arms: usize, contexts: usize) -> Result<(), LpError> {
        let bad_arm = self.saturated.iter().find(|&&k| k >= arms).map(|&k| (k, 0));
        let bad_pair = self.zeros.iter().find(|&&(k, c)| k >= arms || c >= contexts).copied();
        match bad_arm.or(bad_pair) {
            Some((arm, context)) => Err(LpError::ActiveSetOutOfRange {
                arm,
                context,
                arms,
                contexts,
            }),
            None => Ok(()),
        }
    }

    /// Set from a constraint-index combination: indices `< arms` are revenue
    /// constraints, the rest enumerate pairs context-major.
    pub(crate) fn from_constraint_indices(indices: &[usize], arms: usize) -> Self {
        let mut set = Self::default();
        for &i in indices {
            if i < arms {
                set.saturated.insert(i);
            } else {
                let j = i - arms;
                set.zeros.insert((j % arms, j / arms));
            }
        }
        set
    }
}

impl fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .saturated
            .iter()
            .map(|k| (k + 1).to_string())
            .chain(self.zeros.iter().map(|(k, c)| format!("({},{})", k + 1, c + 1)))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct OneBased {
    saturated_arms: Vec<usize>,
    zero_pairs: Vec<(usize, usize)>,
}

impl Serialize for ActiveSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        OneBased {
            saturated_arms: self.saturated.iter().map(|k| k + 1).collect(),
            zero_pairs: self.zeros.iter().map(|&(k, c)| (k + 1, c + 1)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ActiveSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = OneBased::deserialize(deserializer)?;
        if raw.saturated_arms.contains(&0) || raw.zero_pairs.iter().any(|&(k, c)| k == 0 || c == 0) {
            return Err(serde::de::Error::custom("active-set labels are 1-based"));
        }
        Ok(Self::from_one_based(&raw.saturated_arms, &raw.zero_pairs))
    }
}
