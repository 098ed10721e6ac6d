//! Random systems, fields and independent oracles shared by the property
//! and acceptance targets.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use flatcheck_core::expr::{Base, Expr, Var};
use flatcheck_core::jetgeom::{JetSpace, MultiIndex, RankContext, Sampler, VectorField};
use flatcheck_core::prolong::{build_prolonged, gamma_field, gamma_sequence, ProlongedSystem};
use flatcheck_core::sysdsl::SystemDef;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};

pub fn config(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        max_shrink_iters: 256,
        ..Config::default()
    }
}

/// A monomial as `(coefficient, [(variable slot, exponent)])`.
pub type Term = (i64, Vec<(usize, u32)>);

pub fn term(slots: usize, max_factors: usize, max_exp: u32, max_coeff: i64) -> impl Strategy<Value = Term> {
    let coeff = (1..=max_coeff).prop_flat_map(|c| prop_oneof![Just(c), Just(-c)]);
    (
        coeff,
        prop::collection::vec((0..slots, 1..=max_exp), 0..=max_factors),
    )
}

pub fn terms(slots: usize, max_terms: usize, max_factors: usize, max_exp: u32) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(term(slots, max_factors, max_exp, 5), 0..=max_terms)
}

pub fn build(vars: &[Var], ts: &[Term]) -> Expr {
    ts.iter().fold(Expr::zero(), |acc, (c, fs)| {
        let mono = fs
            .iter()
            .fold(Expr::int(*c), |m, &(s, e)| m.mul(&Expr::var(vars[s]).pow(e)));
        acc.add(&mono)
    })
}

/// The scalar universe for algebraic properties: three states, two inputs
/// and a trig pair on `x1`.
pub fn scalar_vars() -> Vec<Var> {
    vec![
        Var::State(1),
        Var::State(2),
        Var::State(3),
        Var::Input(1, 0),
        Var::Input(2, 0),
        Var::Sin(Base::State(1)),
        Var::Cos(Base::State(1)),
    ]
}

/// Polynomial, trig-free variables only.
pub fn plain_vars() -> Vec<Var> {
    scalar_vars()[..5].to_vec()
}

/// A rational expression: a sparse numerator (trig allowed) over a
/// trig-free denominator that is 1 half of the time.
pub fn rational_expr() -> impl Strategy<Value = Expr> {
    let vars = scalar_vars();
    let plain = plain_vars();
    (terms(vars.len(), 3, 2, 2), prop::option::of(terms(plain.len(), 2, 2, 1))).prop_map(
        move |(num, den)| {
            let n = build(&vars, &num);
            match den.map(|d| build(&plain, &d)) {
                Some(d) if !d.is_zero() => n.div(&d).expect("nonzero denominator"),
                _ => n,
            }
        },
    )
}

/// A trig-free rational expression.
pub fn plain_rational_expr() -> impl Strategy<Value = Expr> {
    let plain = plain_vars();
    (terms(plain.len(), 3, 2, 2), prop::option::of(terms(plain.len(), 2, 2, 1))).prop_map(
        move |(num, den)| {
            let n = build(&plain, &num);
            match den.map(|d| build(&plain, &d)) {
                Some(d) if !d.is_zero() => n.div(&d).expect("nonzero denominator"),
                _ => n,
            }
        },
    )
}

/// A field with polynomial coefficients: per coordinate, the raw terms.
pub type RawField = Vec<Vec<Term>>;

pub fn raw_field(dim: usize, max_terms: usize) -> impl Strategy<Value = RawField> {
    prop::collection::vec(terms(dim, max_terms, 2, 2), dim)
}

pub fn field(space: &Arc<JetSpace>, raw: &RawField) -> VectorField {
    let coords = space.coords();
    VectorField::from_coeffs(
        space.clone(),
        raw.iter()
            .enumerate()
            .map(|(i, ts)| (coords[i], build(coords, ts))),
    )
}

/// `x1..x3, u1` with no prolongation.
pub fn small_space() -> Arc<JetSpace> {
    Arc::new(JetSpace::new(3, MultiIndex(vec![0])))
}

pub fn context(seed: u64) -> Arc<RankContext> {
    Arc::new(RankContext::new(Sampler::new(seed, 5)))
}

/// Sparse polynomials as exponent vectors over a fixed coordinate list.
/// Everything below is deliberately independent of `Expr`.
pub type RawPoly = BTreeMap<Vec<u32>, i64>;

pub fn raw_poly(dim: usize, ts: &[Term]) -> RawPoly {
    let mut p = RawPoly::new();
    for (c, fs) in ts {
        let mut e = vec![0u32; dim];
        for &(s, k) in fs {
            e[s] += k;
        }
        *p.entry(e).or_default() += c;
    }
    p.retain(|_, c| *c != 0);
    p
}

fn raw_mul(a: &RawPoly, b: &RawPoly) -> RawPoly {
    let mut out = RawPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_default() += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn raw_diff(a: &RawPoly, s: usize) -> RawPoly {
    let mut out = RawPoly::new();
    for (e, c) in a {
        if e[s] > 0 {
            let mut e2 = e.clone();
            e2[s] -= 1;
            *out.entry(e2).or_default() += c * e[s] as i64;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn raw_add(a: &mut RawPoly, b: &RawPoly, sign: i64) {
    for (e, c) in b {
        *a.entry(e.clone()).or_default() += sign * c;
    }
    a.retain(|_, c| *c != 0);
}

/// `[v, w]_i = Σ_s v_s ∂_s w_i − w_s ∂_s v_i`, monomial by monomial.
pub fn raw_bracket(v: &[RawPoly], w: &[RawPoly]) -> Vec<RawPoly> {
    let dim = v.len();
    (0..dim)
        .map(|i| {
            let mut acc = RawPoly::new();
            for s in 0..dim {
                raw_add(&mut acc, &raw_mul(&v[s], &raw_diff(&w[i], s)), 1);
                raw_add(&mut acc, &raw_mul(&w[s], &raw_diff(&v[i], s)), -1);
            }
            acc
        })
        .collect()
}

pub fn raw_to_expr(coords: &[Var], p: &RawPoly) -> Expr {
    p.iter().fold(Expr::zero(), |acc, (e, c)| {
        let mono = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .fold(Expr::int(*c), |m, (s, &k)| m.mul(&Expr::var(coords[s]).pow(k)));
        acc.add(&mono)
    })
}

/// The library bracket equals the term-by-term oracle.
pub fn check_bracket_oracle(a: &RawField, b: &RawField) -> Result<(), TestCaseError> {
    let space = small_space();
    let dim = space.dim();
    let coords = space.coords();
    let ra: Vec<RawPoly> = a.iter().map(|t| raw_poly(dim, t)).collect();
    let rb: Vec<RawPoly> = b.iter().map(|t| raw_poly(dim, t)).collect();
    let expect = VectorField::from_coeffs(
        space.clone(),
        raw_bracket(&ra, &rb)
            .iter()
            .enumerate()
            .map(|(i, p)| (coords[i], raw_to_expr(coords, p))),
    );
    let got = field(&space, a).lie_bracket(&field(&space, b)).unwrap();
    prop_assert_eq!(got, expect);
    Ok(())
}

/// Antisymmetry and the Jacobi identity.
pub fn check_antisymmetry_jacobi(a: &RawField, b: &RawField, c: &RawField) -> Result<(), TestCaseError> {
    let space = small_space();
    let (u, v, w) = (field(&space, a), field(&space, b), field(&space, c));
    let uv = u.lie_bracket(&v).unwrap();
    prop_assert_eq!(uv.clone(), v.lie_bracket(&u).unwrap().neg());
    let jacobi = u
        .lie_bracket(&v.lie_bracket(&w).unwrap())
        .unwrap()
        .add(&v.lie_bracket(&w.lie_bracket(&u).unwrap()).unwrap())
        .unwrap()
        .add(&w.lie_bracket(&uv).unwrap())
        .unwrap();
    prop_assert!(jacobi.is_zero(), "Jacobi sum {:?}", jacobi);
    Ok(())
}

/// A random control system with a sparse polynomial drift, plus a
/// prolongation multi-index.
#[derive(Clone, Debug)]
pub struct RandomSystem {
    pub n: usize,
    pub m: usize,
    pub drift: Vec<Vec<Term>>,
    pub j: Vec<u32>,
}

impl RandomSystem {
    pub fn system(&self) -> SystemDef {
        let xs: Vec<String> = (1..=self.n).map(|i| format!("x{i}")).collect();
        let us: Vec<String> = (1..=self.m).map(|i| format!("u{i}")).collect();
        let vars: Vec<Var> = (1..=self.n as u16)
            .map(Var::State)
            .chain((1..=self.m as u16).map(|i| Var::Input(i, 0)))
            .collect();
        let f = self.drift.iter().map(|ts| build(&vars, ts)).collect();
        let xs: Vec<&str> = xs.iter().map(String::as_str).collect();
        let us: Vec<&str> = us.iter().map(String::as_str).collect();
        SystemDef::new("random", &xs, &us, f).expect("valid random system")
    }

    pub fn prolonged(&self, seed: u64) -> ProlongedSystem {
        build_prolonged(Arc::new(self.system()), MultiIndex(self.j.clone()), context(seed))
    }
}

/// `n ≤ 4`, `m ≤ min(3, n)`, drift terms of degree ≤ 2, `j_i ≤ 3`.
pub fn random_system() -> impl Strategy<Value = RandomSystem> {
    (1usize..=4)
        .prop_flat_map(|n| (Just(n), 1..=n.min(3)))
        .prop_flat_map(|(n, m)| {
            (
                Just(n),
                Just(m),
                prop::collection::vec(
                    prop::collection::vec(term(n + m, 2, 1, 3), 0..=2),
                    n,
                ),
                prop::collection::vec(0u32..=3, m),
            )
        })
        .prop_map(|(n, m, drift, j)| RandomSystem { n, m, drift, j })
}

fn input(i: usize, k: u32) -> Var {
    Var::Input(i as u16 + 1, k as u16)
}

fn sign(field: VectorField, k: u32) -> VectorField {
    if k.is_multiple_of(2) {
        field
    } else {
        field.neg()
    }
}

/// The bracket identities of the prolonged system: integrator chains,
/// the γ form and verticality of the higher brackets, the vanishing
/// brackets between prolonged coordinates and `ad g₀` of the original
/// inputs, and `[Γ, Δ]` having no component on prolonged derivatives.
pub fn check_prolonged_identities(rs: &RandomSystem, k_max: u32) -> Result<(), TestCaseError> {
    let ps = rs.prolonged(11);
    let space = ps.space().clone();
    let coord = |v: Var| VectorField::coordinate(space.clone(), v);
    for i in 0..rs.m {
        let ji = rs.j[i];
        for k in 0..=ji {
            prop_assert_eq!(ps.ad_gi(i, k as usize), sign(coord(input(i, ji - k)), k));
        }
        for k in 1..=k_max {
            let high = ps.ad_gi(i, (ji + k) as usize);
            let low = sign(ps.ad_coordinate(input(i, 0), k as usize), ji);
            prop_assert_eq!(&high, &low);
            let bound = MultiIndex(rs.j.iter().map(|&jp| jp.min(k - 1)).collect());
            prop_assert!(high.is_vertical(&bound), "ad^{} g{} not vertical within {}", ji + k, i + 1, bound);
        }
    }
    for p in 0..rs.m {
        for q in 0..rs.m {
            let jp = rs.j[p];
            for k in 0..jp {
                for r in 0..=(jp - k) {
                    // l = j_q + r, so k + l < j_p + j_q + 1.
                    let br = coord(input(p, jp - k))
                        .lie_bracket(&ps.ad_coordinate(input(q, 0), r as usize))
                        .unwrap();
                    prop_assert!(br.is_zero(), "[d/du{}^({}), ad^{} d/du{}] = {:?}", p + 1, jp - k, r, q + 1, br);
                }
            }
        }
    }
    let top = rs.j.iter().copied().max().unwrap_or(0) as usize;
    for g in ps.gamma_level(top).generators() {
        for d in ps.delta_level(top + 1).generators() {
            let br = g.lie_bracket(d).unwrap();
            prop_assert!(
                br.coeffs().keys().all(|v| !matches!(v, Var::Input(_, k) if *k >= 1)),
                "[Γ, Δ] leaves the vertical directions: {:?}",
                br
            );
        }
    }
    Ok(())
}

/// `γ_{k,i} ∂/∂x` from the recursion equals `ad^{j_i+k} g_i`.
pub fn check_gamma_recursion(rs: &RandomSystem, k_max: usize) -> Result<(), TestCaseError> {
    let ps = rs.prolonged(13);
    for i in 0..rs.m {
        for k in 1..=k_max {
            let gamma = gamma_sequence(&ps, i, k).unwrap();
            let via_recursion = gamma_field(&ps, &gamma);
            prop_assert_eq!(via_recursion, ps.ad_gi(i, rs.j[i] as usize + k));
        }
    }
    Ok(())
}

/// `G_k = Γ_k ⊕ Δ_k` at every level up to one past stabilisation, with
/// monotone ranks and the stabilisation bound.
pub fn check_decomposition(rs: &RandomSystem) -> Result<(), TestCaseError> {
    let ps = rs.prolonged(17);
    let k_star = ps.k_star().unwrap();
    let bound = rs.n + rs.j.iter().sum::<u32>() as usize;
    prop_assert!(k_star <= bound);
    let mut prev: Option<(usize, usize)> = None;
    for k in 0..=k_star + 1 {
        prop_assert!(ps.decomposition_check(k).unwrap(), "decomposition fails at k = {}", k);
        let rg = ps.g_level(k).rank().unwrap();
        let rd = ps.delta_level(k).rank().unwrap();
        if let Some((pg, pd)) = prev {
            prop_assert!(rg >= pg && rd >= pd);
        }
        prev = Some((rg, rd));
    }
    let (g1, g2) = (ps.g_level(k_star), ps.g_level(k_star + 1));
    prop_assert_eq!(g1.rank().unwrap(), g2.rank().unwrap());
    for v in g2.generators() {
        prop_assert!(g1.contains(v).unwrap());
    }
    let (d1, d2) = (ps.delta_level(k_star), ps.delta_level(k_star + 1));
    prop_assert_eq!(d1.rank().unwrap(), d2.rank().unwrap());
    Ok(())
}
