use std::fmt;

use serde::{Deserialize, Serialize};

/// Prolongation orders `(j₁, …, j_m)`, one per input channel.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|j| = Σ j_i`.
    pub fn abs(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_component(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Componentwise minimum.
    pub fn cmin(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    /// Componentwise maximum.
    pub fn cmax(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// Componentwise `≤`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Stable permutation sorting the components ascending: `perm[r]` is the
    /// channel placed at rank `r`.
    pub fn sorting_permutation(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| self.0[i]);
        idx
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        MultiIndex(perm.iter().map(|&i| self.0[i]).collect())
    }

    /// Subtracts the smallest component from every component.
    pub fn normalized(&self) -> Self {
        let lo = self.0.iter().copied().min().unwrap_or(0);
        MultiIndex(self.0.iter().map(|v| v - lo).collect())
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
