//! Sparse multivariate polynomials over ℚ in graded-lexicographic order.
//!
//! `Poly` itself is the free commutative ring: `sin(θ)` and `cos(θ)` are
//! independent indeterminates here. The Pythagorean relation is applied
//! explicitly through [`Poly::reduce_trig`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::var::Var;

/// A monomial: variables in ascending order, all exponents positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Mono(Vec<(Var, u32)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn var(v: Var) -> Mono {
        Mono(vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(Var, u32)>) -> Mono {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_by_key(|&(v, _)| v);
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Mono(out)
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == v {
                let f = other.0[j].1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((v, e - f));
                }
                j += 1;
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Mono) -> Mono {
        let mut out = Vec::new();
        for &(v, e) in &self.0 {
            let f = other.exponent(v);
            if f > 0 {
                out.push((v, e.min(f)));
            }
        }
        Mono(out)
    }

    /// Removes variable `v`, returning its exponent and the rest.
    pub fn split_var(&self, v: Var) -> (u32, Mono) {
        match self.0.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => {
                let mut rest = self.0.clone();
                let (_, e) = rest.remove(i);
                (e, Mono(rest))
            }
            Err(_) => (0, self.clone()),
        }
    }

    /// Splits into (sin-atom part, remainder).
    pub fn split_sin(&self) -> (Mono, Mono) {
        let (s, r): (Vec<_>, Vec<_>) = self.0.iter().partition(|(v, _)| v.is_sin());
        (Mono(s), Mono(r))
    }

    fn cmp_lex(&self, other: &Mono) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                },
            }
        }
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.cmp_lex(other))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with rational coefficients; no zero coefficients are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    pub fn int(i: i64) -> Poly {
        Poly::constant(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn var(v: Var) -> Poly {
        Poly::term(Mono::var(v), BigRational::one())
    }

    pub fn term(m: Mono, c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Mono, BigRational)>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    /// The constant value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.leading().map(|(m, _)| m.degree()).unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Mono, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.mul(m), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for &(v, _) in m.pairs() {
                s.insert(v);
            }
        }
        s
    }

    pub fn has_trig(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.pairs().last().is_some_and(|(v, _)| v.is_trig()))
    }

    pub fn has_sin(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.pairs().iter().any(|(v, _)| v.is_sin()))
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Mono::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Partial derivative in the free ring, with the chain rule through trig
    /// atoms whose base is `v`. The result is not trig-reduced.
    pub fn diff(&self, v: Var) -> Poly {
        let sin = v.as_base().map(Var::Sin);
        let cos = v.as_base().map(Var::Cos);
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (idx, &(w, e)) in m.pairs().iter().enumerate() {
                let mut rest: Vec<(Var, u32)> = m.pairs().to_vec();
                rest[idx].1 -= 1;
                let coef = c * BigRational::from_integer(BigInt::from(e));
                if w == v {
                    out.add_term(Mono::from_pairs(rest), coef);
                } else if Some(w) == sin {
                    rest.push((cos.unwrap(), 1));
                    out.add_term(Mono::from_pairs(rest), coef);
                } else if Some(w) == cos {
                    rest.push((sin.unwrap(), 1));
                    out.add_term(Mono::from_pairs(rest), -coef);
                }
            }
        }
        out
    }

    /// Applies `sin(θ)² → 1 − cos(θ)²` until every sin exponent is ≤ 1.
    pub fn reduce_trig(&self) -> Poly {
        if !self.has_sin() {
            return self.clone();
        }
        let mut out = Poly::zero();
        let mut work: Vec<(Mono, BigRational)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        while let Some((m, c)) = work.pop() {
            let high = m
                .pairs()
                .iter()
                .find(|&&(v, e)| v.is_sin() && e >= 2)
                .copied();
            match high {
                None => out.add_term(m, c),
                Some((s, e)) => {
                    let b = s.trig_base().unwrap();
                    let mut lower: Vec<(Var, u32)> = m.pairs().to_vec();
                    for p in lower.iter_mut() {
                        if p.0 == s {
                            p.1 = e - 2;
                        }
                    }
                    let base = Mono::from_pairs(lower);
                    work.push((base.clone(), c.clone()));
                    work.push((base.mul(&Mono::from_pairs(vec![(Var::Cos(b), 2)])), -c));
                }
            }
        }
        out
    }

    /// Coefficients with respect to `v`: entry `i` multiplies `v^i`.
    pub fn to_univariate(&self, v: Var) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_var(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_univariate(coeffs: &[Poly], v: Var) -> Poly {
        let mut out = Poly::zero();
        for (i, p) in coeffs.iter().enumerate() {
            let vm = Mono::from_pairs(vec![(v, i as u32)]);
            for (m, c) in &p.terms {
                out.add_term(m.mul(&vm), c.clone());
            }
        }
        out
    }

    /// Exact division in the free ring; `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&(BigRational::one() / c)));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let inv = BigRational::one() / dc;
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&dm)?;
            let qc = rc * &inv;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Scales so the leading coefficient is 1; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&(BigRational::one() / c)),
        }
    }

    /// Evaluates with a total assignment.
    pub fn eval(&self, value: &impl Fn(Var) -> Option<BigRational>) -> Option<BigRational> {
        let mut cache: BTreeMap<Var, BigRational> = BTreeMap::new();
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.pairs() {
                let x = match cache.get(&v) {
                    Some(x) => x.clone(),
                    None => {
                        let x = value(v)?;
                        cache.insert(v, x.clone());
                        x
                    }
                };
                t *= num_traits::pow(x, e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, value: &impl Fn(Var) -> f64) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = ratio_to_f64(c);
            for &(v, e) in m.pairs() {
                t *= value(v).powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    /// Integer content normalisation helper: makes all coefficients integral
    /// and coprime, positive leading coefficient.
    pub fn primitive_integer(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = num_integer::lcm(den, c.denom().clone());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let v = c.numer() * (&den / c.denom());
            g = num_integer::gcd(g, v);
        }
        let mut k = BigRational::new(den, g);
        if self.leading_coeff().is_negative() {
            k = -k;
        }
        self.scale(&k)
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::var::Base;

    fn x(i: u16) -> Poly {
        Poly::var(Var::State(i))
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let a = Mono::from_pairs(vec![(Var::State(1), 1)]);
        let b = Mono::from_pairs(vec![(Var::State(2), 2)]);
        let c = Mono::from_pairs(vec![(Var::State(2), 1)]);
        assert!(a < b);
        assert!(c < a);
    }

    #[test]
    fn expand_square() {
        let p = x(1).add(&x(2));
        let sq = p.mul(&p);
        let expect = x(1)
            .mul(&x(1))
            .add(&x(1).mul(&x(2)).scale(&BigRational::from_integer(2.into())))
            .add(&x(2).mul(&x(2)));
        assert_eq!(sq, expect);
    }

    #[test]
    fn exact_division_and_failure() {
        let a = x(1).mul(&x(1)).sub(&Poly::one());
        let d = x(1).sub(&Poly::one());
        assert_eq!(a.div_exact(&d).unwrap(), x(1).add(&Poly::one()));
        assert!(x(1).add(&Poly::one()).div_exact(&x(2)).is_none());
    }

    #[test]
    fn sin_square_reduces() {
        let s = Poly::var(Var::Sin(Base::State(1)));
        let c = Poly::var(Var::Cos(Base::State(1)));
        let r = s.pow(3).reduce_trig();
        assert_eq!(r, s.sub(&s.mul(&c).mul(&c)));
    }

    #[test]
    fn univariate_round_trip() {
        let p = x(1).mul(&x(2)).add(&x(2).pow(3)).add(&x(1));
        let u = p.to_univariate(Var::State(2));
        assert_eq!(u.len(), 4);
        assert_eq!(Poly::from_univariate(&u, Var::State(2)), p);
    }
}
