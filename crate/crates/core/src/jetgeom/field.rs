use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::multiindex::MultiIndex;
use super::space::JetSpace;
use super::GeomError;
use crate::expr::{Expr, Var, VarNamer};

/// A vector field on a jet space, stored sparsely (absent coefficients are 0).
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    space: Arc<JetSpace>,
    coeffs: BTreeMap<Var, Expr>,
}

impl VectorField {
    pub fn zero(space: Arc<JetSpace>) -> Self {
        VectorField {
            space,
            coeffs: BTreeMap::new(),
        }
    }

    /// The coordinate field `∂/∂v`.
    pub fn coordinate(space: Arc<JetSpace>, v: Var) -> Self {
        Self::from_coeffs(space, [(v, Expr::one())])
    }

    /// Builds a field, dropping zero coefficients.
    ///
    /// Panics if a coordinate is not in the space.
    pub fn from_coeffs(space: Arc<JetSpace>, it: impl IntoIterator<Item = (Var, Expr)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (v, e) in it {
            assert!(space.contains(v), "{v} is not a coordinate of {space:?}");
            if !e.is_zero() {
                coeffs.insert(v, e);
            }
        }
        VectorField { space, coeffs }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coeff(&self, v: Var) -> Expr {
        self.coeffs.get(&v).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, Expr> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check(&self, other: &VectorField) -> Result<(), GeomError> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(GeomError::SpaceMismatch)
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, GeomError> {
        self.check(other)?;
        let mut coeffs = self.coeffs.clone();
        for (v, e) in &other.coeffs {
            let s = coeffs.get(v).map(|a| a.add(e)).unwrap_or_else(|| e.clone());
            if s.is_zero() {
                coeffs.remove(v);
            } else {
                coeffs.insert(*v, s);
            }
        }
        Ok(VectorField {
            space: self.space.clone(),
            coeffs,
        })
    }

    pub fn neg(&self) -> VectorField {
        self.scale(&Expr::int(-1))
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, GeomError> {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by a scalar function.
    pub fn scale(&self, e: &Expr) -> VectorField {
        VectorField::from_coeffs(
            self.space.clone(),
            self.coeffs.iter().map(|(v, c)| (*v, c.mul(e))),
        )
    }

    /// Lie derivative `L_v e = Σ v_ξ ∂e/∂ξ`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let vars = e.base_vars();
        let mut acc = Expr::zero();
        for (v, c) in &self.coeffs {
            if vars.contains(v) {
                acc = acc.add(&c.mul(&e.diff(*v)));
            }
        }
        acc
    }

    /// `[self, other]_i = Σ_ξ self_ξ ∂other_i/∂ξ − other_ξ ∂self_i/∂ξ`.
    pub fn lie_bracket(&self, other: &VectorField) -> Result<VectorField, GeomError> {
        self.check(other)?;
        let mut out: BTreeMap<Var, Expr> = BTreeMap::new();
        let mut push = |v: Var, e: Expr| {
            if e.is_zero() {
                return;
            }
            let s = out.get(&v).map(|a| a.add(&e)).unwrap_or(e);
            out.insert(v, s);
        };
        for (i, w) in &other.coeffs {
            push(*i, self.apply(w));
        }
        for (i, v) in &self.coeffs {
            push(*i, other.apply(v).neg());
        }
        Ok(VectorField::from_coeffs(self.space.clone(), out))
    }

    /// `ad_self^k w`, with `ad⁰ w = w`.
    pub fn ad_pow(&self, w: &VectorField, k: u32) -> Result<VectorField, GeomError> {
        self.check(w)?;
        let mut acc = w.clone();
        for _ in 0..k {
            acc = self.lie_bracket(&acc)?;
        }
        Ok(acc)
    }

    /// True iff the field only points along `∂/∂x` and its coefficients
    /// depend on states and on `u_i^(k)` with `k ≤ bound_i`.
    pub fn is_vertical(&self, bound: &MultiIndex) -> bool {
        self.coeffs.iter().all(|(v, e)| {
            matches!(v, Var::State(_))
                && e.base_vars().into_iter().all(|w| match w {
                    Var::Input(i, k) => bound
                        .0
                        .get(i as usize - 1)
                        .is_some_and(|&b| k as u32 <= b),
                    _ => true,
                })
        })
    }

    pub fn render(&self, names: &dyn VarNamer) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (v, e)) in self.coeffs.iter().enumerate() {
            let d = format!("d/d{}", names.name(*v));
            let (neg, mag) = if e.numer().len() == 1 && e.numer().leading_coeff() < BigRational::zero() {
                (true, e.neg())
            } else {
                (false, e.clone())
            };
            let term = if mag.is_one() {
                d
            } else if mag.numer().len() > 1 && mag.denom().is_one() {
                format!("({})*{d}", mag.render(names))
            } else {
                format!("{}*{d}", mag.render(names))
            };
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&term);
        }
        out
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&crate::expr::DefaultNamer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> Arc<JetSpace> {
        Arc::new(JetSpace::new(3, MultiIndex(vec![1])))
    }

    #[test]
    fn coordinate_brackets_vanish() {
        let s = space();
        let a = VectorField::coordinate(s.clone(), Var::State(1));
        let b = VectorField::coordinate(s.clone(), Var::Input(1, 0));
        assert!(a.lie_bracket(&b).unwrap().is_zero());
        assert!(a.lie_bracket(&a).unwrap().is_zero());
    }

    #[test]
    fn bracket_of_linear_fields() {
        // [x2 ∂x1, ∂x2] = −∂x1
        let s = space();
        let v = VectorField::from_coeffs(s.clone(), [(Var::State(1), Expr::state(2))]);
        let w = VectorField::coordinate(s.clone(), Var::State(2));
        let b = v.lie_bracket(&w).unwrap();
        assert_eq!(b, VectorField::coordinate(s, Var::State(1)).neg());
    }

    #[test]
    fn mismatched_spaces() {
        let a = VectorField::coordinate(space(), Var::State(1));
        let other = Arc::new(JetSpace::new(3, MultiIndex(vec![2])));
        let b = VectorField::coordinate(other, Var::State(1));
        assert_eq!(a.lie_bracket(&b), Err(GeomError::SpaceMismatch));
    }

    #[test]
    fn verticality() {
        let s = space();
        let v = VectorField::from_coeffs(s.clone(), [(Var::State(1), Expr::input(1, 1))]);
        assert!(v.is_vertical(&MultiIndex(vec![1])));
        assert!(!v.is_vertical(&MultiIndex(vec![0])));
        assert!(!VectorField::coordinate(s, Var::Input(1, 0)).is_vertical(&MultiIndex(vec![5])));
    }
}
