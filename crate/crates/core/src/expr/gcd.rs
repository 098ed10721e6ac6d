//! Multivariate GCD over ℚ by the subresultant polynomial remainder sequence.
//!
//! Works in the free ring (trig atoms are treated as plain indeterminates),
//! which is a UFD, so the result is a genuine GCD there.

use num_rational::BigRational;
use num_traits::One;

use super::poly::{Mono, Poly};
use super::var::Var;

/// Monic GCD of `a` and `b`; `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    gcd_raw(a, b).monic()
}

/// GCD of a list, stopping early once it becomes constant.
pub fn gcd_many<'a>(polys: impl IntoIterator<Item = &'a Poly>) -> Poly {
    let mut g = Poly::zero();
    for p in polys {
        g = gcd(&g, p);
        if g.is_constant() && !g.is_zero() {
            return Poly::one();
        }
    }
    g
}

fn gcd_raw(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() == 1 || b.len() == 1 {
        let ma = a.monomial_content();
        let mb = b.monomial_content();
        return Poly::term(ma.gcd(&mb), BigRational::one());
    }
    // Pull out monomial content first; it keeps the PRS small.
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a = strip_monomial(a, &ma);
    let b = strip_monomial(b, &mb);
    let va = a.vars();
    let vb = b.vars();
    let main = va.intersection(&vb).next().copied();
    let core = match main {
        None => Poly::one(),
        Some(v) => gcd_in(&a, &b, v),
    };
    core.mul_term(&mg, &BigRational::one())
}

fn strip_monomial(p: &Poly, m: &Mono) -> Poly {
    if m.is_one() {
        return p.clone();
    }
    Poly::from_terms(p.terms().map(|(t, c)| (t.div(m).unwrap(), c.clone())))
}

/// GCD viewing both polynomials as univariate in `v`.
fn gcd_in(a: &Poly, b: &Poly, v: Var) -> Poly {
    let ua = a.to_univariate(v);
    let ub = b.to_univariate(v);
    let ca = content(&ua);
    let cb = content(&ub);
    let d = gcd_raw(&ca, &cb);
    let pa = div_coeffs(&ua, &ca);
    let pb = div_coeffs(&ub, &cb);
    let g = subresultant(pa, pb);
    let cg = content(&g);
    let pg = div_coeffs(&g, &cg);
    Poly::from_univariate(&pg, v).mul(&d)
}

fn content(u: &[Poly]) -> Poly {
    let mut g = Poly::zero();
    for c in u {
        if c.is_zero() {
            continue;
        }
        g = gcd_raw(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    if g.is_zero() {
        Poly::one()
    } else {
        g.monic()
    }
}

fn div_coeffs(u: &[Poly], d: &Poly) -> Vec<Poly> {
    if d.is_one() {
        return u.to_vec();
    }
    u.iter()
        .map(|c| c.div_exact(d).expect("content divides every coefficient"))
        .collect()
}

fn deg(u: &[Poly]) -> usize {
    u.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

fn trim(mut u: Vec<Poly>) -> Vec<Poly> {
    while u.len() > 1 && u.last().is_some_and(|c| c.is_zero()) {
        u.pop();
    }
    u
}

fn is_zero_u(u: &[Poly]) -> bool {
    u.iter().all(|c| c.is_zero())
}

/// Pseudo-remainder of `a` by `b` (deg a ≥ deg b).
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = deg(b);
    let lb = &b[db];
    let mut r: Vec<Poly> = trim(a.to_vec());
    let mut e = deg(&r) as i64 - db as i64 + 1;
    while !is_zero_u(&r) && deg(&r) >= db {
        let dr = deg(&r);
        let t = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(lb)).collect();
        for (i, bc) in b.iter().enumerate().take(db + 1) {
            next[i + shift] = next[i + shift].sub(&bc.mul(&t));
        }
        r = trim(next);
        e -= 1;
        if dr == 0 {
            break;
        }
    }
    if e > 0 {
        let k = lb.pow(e as u32);
        r = r.iter().map(|c| c.mul(&k)).collect();
    }
    r
}

fn subresultant(mut a: Vec<Poly>, mut b: Vec<Poly>) -> Vec<Poly> {
    a = trim(a);
    b = trim(b);
    if deg(&a) < deg(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let delta = deg(&a) - deg(&b);
        let r = prem(&a, &b);
        if is_zero_u(&r) {
            return b;
        }
        if deg(&r) == 0 {
            return vec![Poly::one()];
        }
        let divisor = g.mul(&h.pow(delta as u32));
        a = b;
        b = r
            .iter()
            .map(|c| c.div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        g = a[deg(&a)].clone();
        if delta > 0 {
            let num = g.pow(delta as u32);
            let den = h.pow(delta as u32 - 1);
            h = num.div_exact(&den).expect("subresultant h update is exact");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u16) -> Poly {
        Poly::var(Var::State(i))
    }

    #[test]
    fn common_linear_factor() {
        let f = x(1).add(&x(2));
        let a = f.mul(&x(1).sub(&Poly::one()));
        let b = f.mul(&x(2).add(&Poly::int(3)));
        assert_eq!(gcd(&a, &b), f.monic());
    }

    #[test]
    fn coprime_gives_one() {
        let a = x(1).mul(&x(1)).add(&x(2));
        let b = x(1).add(&x(2)).add(&Poly::one());
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn monomial_content_is_kept() {
        let a = x(1).mul(&x(2)).mul(&x(2));
        let b = x(2).mul(&x(3)).add(&x(2));
        assert_eq!(gcd(&a, &b), x(2));
    }

    #[test]
    fn higher_degree_factor() {
        let f = x(1).pow(2).add(&x(2).mul(&x(3))).add(&Poly::int(1));
        let a = f.mul(&x(1).add(&x(3)).pow(2));
        let b = f.mul(&x(2).sub(&x(3)));
        assert_eq!(gcd(&a, &b), f.monic());
        let g = gcd(&a.mul(&x(2).sub(&x(3))), &b.mul(&x(1).add(&x(3))));
        assert_eq!(g, f.mul(&x(1).add(&x(3))).mul(&x(2).sub(&x(3))).monic());
    }
}
