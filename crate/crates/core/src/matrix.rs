//! Dense arm × context matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A `K × |C|` matrix indexed by `(arm, context)`.
///
/// Storage is context-major: the entries of one context are contiguous, so
/// `as_slice()[c * arms + k]` is entry `(k, c)`. Allocation LPs use the same
/// ordering for their decision variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMatrix {
    arms: usize,
    contexts: usize,
    data: Vec<f64>,
}

impl PairMatrix {
    pub fn zeros(arms: usize, contexts: usize) -> Self {
        Self::filled(arms, contexts, 0.0)
    }

    pub fn filled(arms: usize, contexts: usize, value: f64) -> Self {
        Self {
            arms,
            contexts,
            data: vec![value; arms * contexts],
        }
    }

    /// Builds a matrix from arm rows (`rows[k][c]`).
    ///
    /// Returns `None` if the rows are ragged or empty.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let arms = rows.len();
        let contexts = rows.first()?.len();
        if contexts == 0 || rows.iter().any(|r| r.len() != contexts) {
            return None;
        }
        let mut m = Self::zeros(arms, contexts);
        for (k, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m[(k, c)] = v;
            }
        }
        Some(m)
    }

    /// Wraps a context-major vector.
    pub fn from_context_major(arms: usize, contexts: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == arms * contexts).then_some(Self {
            arms,
            contexts,
            data,
        })
    }

    pub fn from_fn(arms: usize, contexts: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(arms, contexts);
        for c in 0..contexts {
            for k in 0..arms {
                m[(k, c)] = f(k, c);
            }
        }
        m
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.arms, self.contexts)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.arms..(c + 1) * self.arms]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [f64] {
        let k = self.arms;
        &mut self.data[c * k..(c + 1) * k]
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        (0..self.contexts).map(|c| self[(k, c)]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.arms).map(|k| self.row(k)).collect()
    }

    /// Entrywise map.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            arms: self.arms,
            contexts: self.contexts,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entrywise combination of two equally shaped matrices.
    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix shape mismatch");
        Self {
            arms: self.arms,
            contexts: self.contexts,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Multiplies column `c` by `weights[c]`.
    pub fn scale_columns(&self, weights: &[f64]) -> Self {
        assert_eq!(weights.len(), self.contexts, "one weight per context");
        let mut out = self.clone();
        for (c, &p) in weights.iter().enumerate() {
            out.column_mut(c).iter_mut().for_each(|v| *v *= p);
        }
        out
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "matrix shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "matrix shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn iter_pairs(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let k = self.arms;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, &v)| ((i % k, i / k), v))
    }
}

impl Index<(usize, usize)> for PairMatrix {
    type Output = f64;

    fn index(&self, (k, c): (usize, usize)) -> &f64 {
        debug_assert!(k < self.arms && c < self.contexts);
        &self.data[c * self.arms + k]
    }
}

impl IndexMut<(usize, usize)> for PairMatrix {
    fn index_mut(&mut self, (k, c): (usize, usize)) -> &mut f64 {
        debug_assert!(k < self.arms && c < self.contexts);
        &mut self.data[c * self.arms + k]
    }
}

impl fmt::Display for PairMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.arms {
            let row: Vec<String> = (0..self.contexts)
                .map(|c| format!("{:>10.6}", self[(k, c)]))
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

// Serialized as a list of arm rows, which is how allocation tables are read.
impl Serialize for PairMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PairMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Self::from_rows(&rows).ok_or_else(|| D::Error::custom("matrix rows must be non-empty and equal length"))
    }
}
