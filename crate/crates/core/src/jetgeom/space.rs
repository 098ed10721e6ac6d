use std::collections::HashMap;
use std::fmt;

use super::multiindex::MultiIndex;
use crate::expr::Var;

/// The prolonged state space `X^(j) = X × ℝ^{m+|j|}`.
///
/// Coordinates are ordered `x₁..x_n`, then `u_i^(0)..u_i^(j_i)` channel by
/// channel, which coincides with the derived `Var` ordering.
#[derive(Clone)]
pub struct JetSpace {
    n: usize,
    m: usize,
    j: MultiIndex,
    coords: Vec<Var>,
    index: HashMap<Var, usize>,
}

impl JetSpace {
    pub fn new(n: usize, j: MultiIndex) -> Self {
        let m = j.len();
        let mut coords: Vec<Var> = (1..=n as u16).map(Var::State).collect();
        for (i, &ji) in j.0.iter().enumerate() {
            for k in 0..=ji {
                coords.push(Var::Input(i as u16 + 1, k as u16));
            }
        }
        let index = coords.iter().enumerate().map(|(a, &v)| (v, a)).collect();
        JetSpace {
            n,
            m,
            j,
            coords,
            index,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn j(&self) -> &MultiIndex {
        &self.j
    }

    /// `n + m + |j|`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Var] {
        &self.coords
    }

    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.index.contains_key(&v)
    }

    /// The top derivative `u_i^(j_i)` of channel `i` (0-based).
    pub fn top_input(&self, i: usize) -> Var {
        Var::Input(i as u16 + 1, self.j.get(i) as u16)
    }
}

impl PartialEq for JetSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.j == other.j
    }
}

impl Eq for JetSpace {}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X^{}(n={})", self.j, self.n)
    }
}
