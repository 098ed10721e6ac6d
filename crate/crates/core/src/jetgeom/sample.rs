use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{Base, RationalPoint, Var};

/// Deterministic source of random rational sample points.
///
/// The value given to a variable depends only on `(seed, slot, attempt,
/// variable)`, so a point is consistent across every expression evaluated at
/// it, whatever set of variables each one mentions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampler {
    pub seed: u64,
    pub samples: usize,
    pub max_attempts: u32,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            seed: 0,
            samples: 5,
            max_attempts: 24,
        }
    }
}

impl Sampler {
    pub fn new(seed: u64, samples: usize) -> Self {
        Sampler {
            seed,
            samples: samples.max(1),
            ..Default::default()
        }
    }

    fn value(&self, slot: usize, attempt: u32, v: Var, nonzero: bool) -> BigRational {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((slot as u64) << 8 | attempt as u64);
        rng.set_word_pos((v.key() as u128) << 4);
        loop {
            let p: i64 = rng.gen_range(-60..=60);
            let q: i64 = rng.gen_range(1..=11);
            if nonzero && p == 0 {
                continue;
            }
            return BigRational::new(BigInt::from(p), BigInt::from(q));
        }
    }

    /// A point assigning every variable in `vars` (trig atoms through the
    /// tan-half parameter of their base). Parameters are never zero.
    pub fn point(&self, slot: usize, attempt: u32, vars: &BTreeSet<Var>) -> RationalPoint {
        let mut p = RationalPoint::new();
        for &v in vars {
            match v {
                Var::Sin(b) | Var::Cos(b) => {
                    if !p.contains(Var::Sin(b)) {
                        p.set_trig(b, self.value(slot, attempt, Var::Sin(b), false));
                    }
                    let bv = b.var();
                    if !p.contains(bv) {
                        p.set(bv, self.value(slot, attempt, bv, matches!(b, Base::Param(_))));
                    }
                }
                Var::Param(_) => p.set(v, self.value(slot, attempt, v, true)),
                _ => p.set(v, self.value(slot, attempt, v, false)),
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn values_do_not_depend_on_the_variable_set() {
        let s = Sampler::new(7, 5);
        let a: BTreeSet<Var> = [Var::State(1), Var::Input(2, 3)].into();
        let b: BTreeSet<Var> = [Var::Input(2, 3), Var::State(4), Var::Param(0)].into();
        let pa = s.point(2, 0, &a);
        let pb = s.point(2, 0, &b);
        assert_eq!(pa.get(Var::Input(2, 3)), pb.get(Var::Input(2, 3)));
        assert!(!pb.get(Var::Param(0)).unwrap().is_zero());
        assert_ne!(s.point(3, 0, &a), pa);
        assert_ne!(s.point(2, 1, &a), pa);
    }

    #[test]
    fn trig_pair_is_pythagorean() {
        let s = Sampler::new(1, 5);
        let vars: BTreeSet<Var> = [Var::Sin(Base::State(1))].into();
        let p = s.point(0, 0, &vars);
        let sn = p.get(Var::Sin(Base::State(1))).unwrap();
        let cs = p.get(Var::Cos(Base::State(1))).unwrap();
        assert!((&sn * &sn + &cs * &cs).is_one());
        assert!(p.contains(Var::State(1)));
    }
}
