use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use super::var::{Base, Var};

/// Exact assignment of rationals to variables.
///
/// Trig atoms are assigned through the tangent half-angle parameter `t`:
/// `sin = 2t/(1+t²)`, `cos = (1−t²)/(1+t²)`, so `sin² + cos² = 1` holds
/// exactly at every point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalPoint {
    values: BTreeMap<Var, BigRational>,
}

impl RationalPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: Var, x: BigRational) {
        debug_assert!(!v.is_trig(), "trig atoms are set through set_trig");
        self.values.insert(v, x);
    }

    pub fn set_trig(&mut self, b: Base, t: BigRational) {
        let one = BigRational::one();
        let t2 = &t * &t;
        let den = &one + &t2;
        let two = &one + &one;
        self.values.insert(Var::Sin(b), two * &t / &den);
        self.values.insert(Var::Cos(b), (&one - &t2) / &den);
    }

    pub fn get(&self, v: Var) -> Option<BigRational> {
        self.values.get(&v).cloned()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.values.contains_key(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &BigRational)> {
        self.values.iter()
    }
}
