//! Canonical infix rendering. The output is accepted by the system-file
//! expression parser and reproduces the same canonical value.

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::poly::{Mono, Poly};
use super::var::VarNamer;
use super::Expr;

pub fn render_expr(e: &Expr, names: &dyn VarNamer) -> String {
    if e.denom().is_one() {
        return render_poly(e.numer(), names);
    }
    let num = render_poly(e.numer(), names);
    let den = render_poly(e.denom(), names);
    let num = if e.numer().len() > 1 { format!("({num})") } else { num };
    format!("{num}/({den})")
}

pub fn render_poly(p: &Poly, names: &dyn VarNamer) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&render_term(m, &mag, names));
    }
    out
}

fn render_term(m: &Mono, c: &BigRational, names: &dyn VarNamer) -> String {
    let factors: Vec<String> = m
        .pairs()
        .iter()
        .map(|&(v, e)| {
            let n = names.name(v);
            if e == 1 {
                n
            } else {
                format!("{n}^{e}")
            }
        })
        .collect();
    let coef = if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    };
    if factors.is_empty() {
        coef
    } else if c.is_one() {
        factors.join("*")
    } else {
        format!("{coef}*{}", factors.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{DefaultNamer, Expr};

    #[test]
    fn leading_term_first_with_signs() {
        let e = Expr::state(3)
            .sub(&Expr::state(2).mul(&Expr::input(1, 0)))
            .add(&Expr::frac(1, 2).mul(&Expr::input(1, 1)));
        assert_eq!(e.to_string(), "-x2*u1 + x3 + 1/2*u1'");
    }

    #[test]
    fn fraction_is_parenthesised() {
        let e = Expr::one().div(&Expr::state(1).add(&Expr::one())).unwrap();
        assert_eq!(render_expr(&e, &DefaultNamer), "1/(x1 + 1)");
    }
}
