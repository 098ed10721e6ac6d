use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::sample::Sampler;
use crate::expr::{ratio_to_f64, Base, Poly, RationalPoint, Var};

/// Shared settings and counters for rank computations.
#[derive(Debug)]
pub struct RankContext {
    pub sampler: Sampler,
    /// User base point; unlisted states and inputs sit at 0, unlisted
    /// parameters at 1.
    pub base_point: BTreeMap<Var, BigRational>,
    /// Largest ambient dimension for which the symbolic elimination
    /// cross-check runs; 0 disables it.
    pub cross_check_dim: usize,
    /// Term cap on intermediate entries of the symbolic elimination.
    pub max_terms: usize,
    pub stats: CrossCheckStats,
}

/// Tally of symbolic-versus-sampled rank comparisons.
#[derive(Debug, Default)]
pub struct CrossCheckStats {
    pub agreements: AtomicUsize,
    pub disagreements: AtomicUsize,
    pub skipped: AtomicUsize,
    pub log: Mutex<Vec<String>>,
}

impl CrossCheckStats {
    pub fn agreements(&self) -> usize {
        self.agreements.load(Ordering::Relaxed)
    }

    pub fn disagreements(&self) -> usize {
        self.disagreements.load(Ordering::Relaxed)
    }

    pub fn skipped(&self) -> usize {
        self.skipped.load(Ordering::Relaxed)
    }

    pub(crate) fn record(&self, sampled: usize, symbolic: Option<usize>, what: impl FnOnce() -> String) {
        match symbolic {
            None => {
                self.skipped.fetch_add(1, Ordering::Relaxed);
            }
            Some(s) if s == sampled => {
                self.agreements.fetch_add(1, Ordering::Relaxed);
            }
            Some(s) => {
                self.disagreements.fetch_add(1, Ordering::Relaxed);
                let msg = format!("sampled rank {sampled} vs symbolic rank {s}: {}", what());
                self.log.lock().expect("log lock").push(msg);
            }
        }
    }
}

impl Default for RankContext {
    fn default() -> Self {
        RankContext {
            sampler: Sampler::default(),
            base_point: BTreeMap::new(),
            cross_check_dim: 12,
            max_terms: 4000,
            stats: CrossCheckStats::default(),
        }
    }
}

impl RankContext {
    pub fn new(sampler: Sampler) -> Self {
        RankContext {
            sampler,
            ..Default::default()
        }
    }

    pub fn with_base_point(mut self, base: BTreeMap<Var, BigRational>) -> Self {
        self.base_point = base;
        self
    }

    pub fn with_cross_check_dim(mut self, dim: usize) -> Self {
        self.cross_check_dim = dim;
        self
    }

    /// Exact value of `v` at the base point; `None` for a trig atom whose
    /// base is not 0 (its value is irrational).
    pub fn base_value(&self, v: Var) -> Option<BigRational> {
        match v {
            Var::Sin(b) | Var::Cos(b) => {
                let x = self.base_value(b.var())?;
                if !x.is_zero() {
                    return None;
                }
                Some(if v.is_sin() {
                    BigRational::zero()
                } else {
                    BigRational::one()
                })
            }
            Var::Param(_) => Some(self.base_point.get(&v).cloned().unwrap_or_else(BigRational::one)),
            _ => Some(self.base_point.get(&v).cloned().unwrap_or_else(BigRational::zero)),
        }
    }

    /// Base point restricted to `vars`, when every value is exact.
    pub fn base_rational_point(&self, vars: impl IntoIterator<Item = Var>) -> Option<RationalPoint> {
        let mut p = RationalPoint::new();
        for v in vars {
            match v {
                Var::Sin(b) | Var::Cos(b) => {
                    self.base_value(v)?;
                    p.set_trig(b, BigRational::zero());
                    p.set(b.var(), BigRational::zero());
                }
                _ => p.set(v, self.base_value(v)?),
            }
        }
        Some(p)
    }

    /// Whether `p` vanishes at the base point (floating point for trig atoms
    /// at nonzero angles).
    pub fn vanishes_at_base(&self, p: &Poly) -> bool {
        if let Some(x) = p.eval(&|v| self.base_value(v)) {
            return x.is_zero();
        }
        let f = |v: Var| -> f64 {
            let base = |b: Base| ratio_to_f64(&self.base_value(b.var()).unwrap_or_default());
            match v {
                Var::Sin(b) => base(b).sin(),
                Var::Cos(b) => base(b).cos(),
                _ => ratio_to_f64(&self.base_value(v).unwrap_or_default()),
            }
        };
        p.eval_f64(&f).abs() < 1e-12
    }
}
