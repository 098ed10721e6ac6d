//! Exact symbolic scalars: canonical rational functions over ℚ whose
//! variables include `sin`/`cos` atoms.
//!
//! Canonical form of `num / den`:
//! * both polynomials are trig-reduced (every `sin` exponent ≤ 1);
//! * `den` contains no `sin` atom (it is rationalised by conjugation);
//! * no non-constant polynomial divides `den` and all the `sin`-blocks of
//!   `num` simultaneously;
//! * `den` is monic.
//!
//! With these rules two expressions are equal as functions iff their
//! canonical forms coincide, so `==` on [`Expr`] is semantic equality.

mod gcd;
mod point;
mod poly;
mod render;
mod var;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use gcd::{gcd, gcd_many};
pub use point::RationalPoint;
pub use poly::{ratio_to_f64, Mono, Poly};
pub use render::{render_expr, render_poly};
pub use var::{Base, DefaultNamer, Var, VarNamer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("denominator vanishes at the evaluation point")]
    DenominatorVanishes,
    #[error("no value assigned to {0}")]
    MissingValue(Var),
    #[error("cannot substitute a non-variable into the argument of {0}")]
    UnsupportedTrigComposition(Var),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(i: i64) -> Expr {
        Expr::from_poly(Poly::int(i))
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::from_poly(Poly::constant(r))
    }

    pub fn frac(p: i64, q: i64) -> Expr {
        Expr::rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_poly(Poly::var(v))
    }

    pub fn state(i: u16) -> Expr {
        Expr::var(Var::State(i))
    }

    pub fn input(i: u16, k: u16) -> Expr {
        Expr::var(Var::Input(i, k))
    }

    pub fn sin(b: Base) -> Expr {
        Expr::var(Var::Sin(b))
    }

    pub fn cos(b: Base) -> Expr {
        Expr::var(Var::Cos(b))
    }

    /// Wraps a polynomial, applying the trig reduction.
    pub fn from_poly(p: Poly) -> Expr {
        Expr {
            num: p.reduce_trig(),
            den: Poly::one(),
        }
    }

    /// Builds `num / den` in canonical form.
    pub fn from_fraction(num: Poly, den: Poly) -> Result<Expr, ExprError> {
        let den = den.reduce_trig();
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(canonical(num.reduce_trig(), den))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// The single variable `v` when the expression is exactly `v`.
    pub fn as_var(&self) -> Option<Var> {
        if !self.den.is_one() || self.num.len() != 1 {
            return None;
        }
        let (m, c) = self.num.terms().next()?;
        match m.pairs() {
            [(v, 1)] if c.is_one() => Some(*v),
            _ => None,
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return Expr {
                num: self.num.add(&other.num),
                den: Poly::one(),
            };
        }
        if self.den == other.den {
            return canonical(self.num.add(&other.num), self.den.clone());
        }
        let g = gcd(&self.den, &other.den);
        let a = self.den.div_exact(&g).unwrap();
        let b = other.den.div_exact(&g).unwrap();
        let num = self.num.mul(&b).add(&other.num.mul(&a)).reduce_trig();
        canonical(num, a.mul(&other.den))
    }

    pub fn neg(&self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Expr {
                num: self.num.mul(&other.num).reduce_trig(),
                den: Poly::one(),
            };
        }
        let num = self.num.mul(&other.num).reduce_trig();
        let den = self.den.mul(&other.den).reduce_trig();
        canonical(num, den)
    }

    pub fn scale(&self, k: &BigRational) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn div(&self, other: &Expr) -> Result<Expr, ExprError> {
        if other.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        let num = self.num.mul(&other.den).reduce_trig();
        let den = self.den.mul(&other.num).reduce_trig();
        Ok(canonical(num, den))
    }

    pub fn pow(&self, e: u32) -> Expr {
        let mut acc = Expr::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact partial derivative; `v` must not be a trig atom.
    pub fn diff(&self, v: Var) -> Expr {
        debug_assert!(!v.is_trig(), "cannot differentiate by a trig atom");
        let dn = self.num.diff(v).reduce_trig();
        if self.den.is_one() {
            return Expr {
                num: dn,
                den: Poly::one(),
            };
        }
        let dd = self.den.diff(v).reduce_trig();
        if dd.is_zero() {
            return canonical(dn, self.den.clone());
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd)).reduce_trig();
        let den = self.den.mul(&self.den).reduce_trig();
        canonical(num, den)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    /// Non-trig variables, with trig atoms replaced by their bases.
    pub fn base_vars(&self) -> BTreeSet<Var> {
        self.vars()
            .into_iter()
            .map(|v| v.trig_base().map(Base::var).unwrap_or(v))
            .collect()
    }

    pub fn eval_at(&self, p: &RationalPoint) -> Result<BigRational, ExprError> {
        let look = |v: Var| p.get(v);
        let d = self.den.eval(&look).ok_or_else(|| missing(&self.den, p))?;
        if d.is_zero() {
            return Err(ExprError::DenominatorVanishes);
        }
        let n = self.num.eval(&look).ok_or_else(|| missing(&self.num, p))?;
        Ok(n / d)
    }

    /// Floating-point evaluation; trig atoms are computed from their bases.
    pub fn eval_f64(&self, value: &impl Fn(Var) -> f64) -> f64 {
        let look = |v: Var| match v {
            Var::Sin(b) => value(b.var()).sin(),
            Var::Cos(b) => value(b.var()).cos(),
            _ => value(v),
        };
        self.num.eval_f64(&look) / self.den.eval_f64(&look)
    }

    /// Simultaneous substitution of variables by expressions.
    ///
    /// A trig atom whose base is bound is rewritten only when the binding is
    /// itself a plain non-trig variable.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Expr>) -> Result<Expr, ExprError> {
        let mut image: BTreeMap<Var, Expr> = BTreeMap::new();
        for v in self.vars() {
            if let Some(b) = v.trig_base() {
                if let Some(e) = bindings.get(&b.var()) {
                    let nb = e
                        .as_var()
                        .and_then(|w| w.as_base())
                        .ok_or(ExprError::UnsupportedTrigComposition(v))?;
                    let atom = if v.is_sin() { Var::Sin(nb) } else { Var::Cos(nb) };
                    image.insert(v, Expr::var(atom));
                }
            } else if let Some(e) = bindings.get(&v) {
                image.insert(v, e.clone());
            }
        }
        if image.is_empty() {
            return Ok(self.clone());
        }
        let n = subst_poly(&self.num, &image);
        let d = subst_poly(&self.den, &image);
        n.div(&d)
    }

    pub fn render(&self, names: &dyn VarNamer) -> String {
        render_expr(self, names)
    }
}

fn missing(p: &Poly, pt: &RationalPoint) -> ExprError {
    let v = p
        .vars()
        .into_iter()
        .find(|&v| pt.get(v).is_none())
        .expect("some variable is unassigned");
    ExprError::MissingValue(v)
}

fn subst_poly(p: &Poly, image: &BTreeMap<Var, Expr>) -> Expr {
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut t = Expr::rational(c.clone());
        let mut rest = Vec::new();
        for &(v, e) in m.pairs() {
            match image.get(&v) {
                Some(x) => t = t.mul(&x.pow(e)),
                None => rest.push((v, e)),
            }
        }
        t = t.mul(&Expr::from_poly(Poly::term(Mono::from_pairs(rest), BigRational::one())));
        acc = acc.add(&t);
    }
    acc
}

/// Canonicalises `num / den`, both already trig-reduced, `den ≠ 0`.
fn canonical(mut num: Poly, mut den: Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    // Rationalise: remove every sin atom from the denominator by multiplying
    // with the conjugate `a − b·sin θ`.
    while let Some(s) = den.vars().into_iter().find(|v| v.is_sin()) {
        let u = den.to_univariate(s);
        debug_assert!(u.len() == 2, "reduced denominator is linear in sin");
        let conj = u[0].sub(&u[1].mul(&Poly::var(s)));
        num = num.mul(&conj).reduce_trig();
        den = den.mul(&conj).reduce_trig();
    }
    if let Some(c) = den.as_constant() {
        let k = BigRational::one() / c;
        return Expr {
            num: num.scale(&k),
            den: Poly::one(),
        };
    }
    let g = if num.has_sin() {
        let mut blocks: BTreeMap<Mono, Poly> = BTreeMap::new();
        for (m, c) in num.terms() {
            let (s, r) = m.split_sin();
            blocks.entry(s).or_default().add_term(r, c.clone());
        }
        let mut g = den.clone();
        for b in blocks.values() {
            g = gcd(&g, b);
            if g.is_one() {
                break;
            }
        }
        g
    } else {
        gcd(&num, &den)
    };
    if !g.is_one() {
        num = num.div_exact(&g).expect("gcd divides numerator");
        den = den.div_exact(&g).expect("gcd divides denominator");
    }
    let lc = den.leading_coeff();
    if !lc.is_one() {
        let k = BigRational::one() / lc;
        num = num.scale(&k);
        den = den.scale(&k);
    }
    if den.is_one() {
        den = Poly::one();
    }
    Expr { num, den }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_expr(self, &DefaultNamer))
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Expr {
        Expr::int(i)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::var(v)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(&self, &rhs)
            }
        }
    };
}
binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}
