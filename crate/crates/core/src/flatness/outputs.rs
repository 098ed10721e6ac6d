//! Flat outputs: verification of candidates and a bounded polynomial
//! ansatz search.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::{gcd, Expr, Mono, Poly, Var};
use crate::jetgeom::{Distribution, GeomError, Rref, VectorField};
use crate::prolong::ProlongedSystem;

use super::cns::brunovsky_indices;
use super::FlatnessError;

/// Cap on the candidate tuples tried by the ansatz search.
const MAX_COMBINATIONS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatOutputCheck {
    pub valid: bool,
    /// `κ` value assigned to each candidate, when an assignment passed the
    /// annihilation conditions.
    pub assignment: Option<Vec<usize>>,
    /// Generic rank of the Jacobian of `(y_i, …, y_i^(κ_i−1))_i`.
    pub jacobian_rank: Option<usize>,
    pub failure: Option<String>,
}

impl FlatOutputCheck {
    fn fail(msg: String) -> Self {
        FlatOutputCheck {
            valid: false,
            assignment: None,
            jacobian_rank: None,
            failure: Some(msg),
        }
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = Vec::new();
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let mut seen = BTreeSet::new();
        for i in 0..rest.len() {
            if !seen.insert(rest[i]) {
                continue;
            }
            let v = rest.remove(i);
            cur.push(v);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    rec(&mut sorted, &mut Vec::new(), &mut out);
    out
}

/// Why `y` fails at index `kappa`, or `None` if it is
/// annihilated by `G_{κ−2}` and not by `G_{κ−1}`.
fn annihilation_failure(ps: &ProlongedSystem, y: &Expr, kappa: usize) -> Option<String> {
    if kappa >= 2 {
        for k in 0..=kappa - 2 {
            if ps.g_level(k).generators().iter().any(|g| !g.apply(y).is_zero()) {
                return Some(format!("⟨G_{k}, dy⟩ ≠ 0"));
            }
        }
    }
    let top = ps.g_level(kappa - 1);
    if top.generators().iter().all(|g| g.apply(y).is_zero()) {
        return Some(format!("⟨G_{}, dy⟩ = 0", kappa - 1));
    }
    None
}

fn gradient(ps: &ProlongedSystem, e: &Expr) -> VectorField {
    let coeffs = ps.space().coords().iter().map(|&v| (v, e.diff(v)));
    VectorField::from_coeffs(ps.space().clone(), coeffs)
}

/// Generic rank of the differentials of `exprs` on the prolonged space.
pub fn gradient_rank(ps: &ProlongedSystem, exprs: &[Expr]) -> Result<usize, GeomError> {
    let fields = exprs.iter().map(|e| gradient(ps, e)).collect();
    Distribution::new(ps.space().clone(), fields, ps.context().clone()).rank()
}

fn uses_foreign(ps: &ProlongedSystem, y: &Expr) -> bool {
    y.base_vars()
        .into_iter()
        .any(|v| !matches!(v, Var::Param(_)) && !ps.space().contains(v))
}

/// Checks that `candidates` form a flat output of the (linearizable)
/// prolonged system, trying every assignment of the indices `κ`.
pub fn verify_flat_output(ps: &ProlongedSystem, candidates: &[Expr]) -> Result<FlatOutputCheck, FlatnessError> {
    let kappa = brunovsky_indices(ps)?;
    if candidates.len() != ps.m() {
        return Err(FlatnessError::CandidateCount {
            expected: ps.m(),
            found: candidates.len(),
        });
    }
    if let Some(y) = candidates.iter().find(|y| uses_foreign(ps, y)) {
        return Ok(FlatOutputCheck::fail(format!(
            "{} depends on variables outside the prolonged space",
            y.render(ps.system().as_ref())
        )));
    }
    let dim = ps.space().dim();
    let mut last_failure = None;
    let mut best_rank = None;
    for assign in permutations(&kappa) {
        let failure = candidates
            .iter()
            .zip(&assign)
            .enumerate()
            .find_map(|(i, (y, &k))| annihilation_failure(ps, y, k).map(|f| format!("y{}: {f}", i + 1)));
        if let Some(f) = failure {
            last_failure.get_or_insert(f);
            continue;
        }
        let mut derived = Vec::with_capacity(dim);
        for (y, &k) in candidates.iter().zip(&assign) {
            let mut cur = y.clone();
            for r in 0..k {
                if r > 0 {
                    cur = ps.g0().apply(&cur);
                }
                derived.push(cur.clone());
            }
        }
        let rank = gradient_rank(ps, &derived)?;
        if rank == dim {
            return Ok(FlatOutputCheck {
                valid: true,
                assignment: Some(assign),
                jacobian_rank: Some(rank),
                failure: None,
            });
        }
        best_rank = Some(best_rank.map_or(rank, |b: usize| b.max(rank)));
        last_failure = Some(format!("Jacobian rank {rank} < {dim}"));
    }
    Ok(FlatOutputCheck {
        valid: false,
        assignment: None,
        jacobian_rank: best_rank,
        failure: last_failure,
    })
}

/// Monomials of total degree `1..=degree` in the coordinates, highest
/// degree first.
fn ansatz_monomials(ps: &ProlongedSystem, degree: u32) -> Vec<Mono> {
    let coords = ps.space().coords();
    let mut by_degree: Vec<Vec<Mono>> = vec![Vec::new(); degree as usize + 1];
    fn rec(coords: &[Var], start: usize, left: u32, cur: &mut Vec<(Var, u32)>, d: u32, out: &mut Vec<Vec<Mono>>) {
        if d > 0 {
            out[d as usize].push(Mono::from_pairs(cur.clone()));
        }
        if left == 0 {
            return;
        }
        for i in start..coords.len() {
            for e in 1..=left {
                cur.push((coords[i], e));
                rec(coords, i + 1, left - e, cur, d + e, out);
                cur.pop();
            }
        }
    }
    rec(coords, 0, degree, &mut Vec::new(), 0, &mut by_degree);
    let mut out = Vec::new();
    for mut level in by_degree.into_iter().rev() {
        level.sort();
        out.extend(level);
    }
    out
}

/// Rows of the linear conditions `L_g y = 0` for `g` among `gens`, with
/// `y = Σ c_a m_a`.
fn annihilation_rows(gens: &[VectorField], basis: &[Expr]) -> Vec<Vec<BigRational>> {
    let mut rows = Vec::new();
    for g in gens {
        let images: Vec<Expr> = basis.iter().map(|b| g.apply(b)).collect();
        let mut den = Poly::one();
        for e in &images {
            if !e.denom().is_one() {
                let d = e.denom();
                let common = gcd(&den, d);
                den = den.mul(&d.div_exact(&common).expect("gcd divides"));
            }
        }
        let den = Expr::from_poly(den);
        let mut table: BTreeMap<Mono, Vec<BigRational>> = BTreeMap::new();
        for (a, e) in images.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            let num = e.mul(&den);
            debug_assert!(num.denom().is_one());
            for (mono, c) in num.numer().reduce_trig().terms() {
                table
                    .entry(mono.clone())
                    .or_insert_with(|| vec![BigRational::zero(); basis.len()])[a] = c.clone();
            }
        }
        rows.extend(table.into_values());
    }
    rows
}

/// Basis of the exact nullspace, sparsest vectors first.
fn nullspace(rows: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let rref = Rref::new(rows);
    let pivots: BTreeSet<usize> = rref.pivots.iter().copied().collect();
    let mut out: Vec<(usize, usize, Vec<BigRational>)> = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[f] = BigRational::one();
        for (r, &p) in rref.pivots.iter().enumerate() {
            v[p] = -rref.rows[r][f].clone();
        }
        let nz = v.iter().filter(|c| !c.is_zero()).count();
        out.push((nz, f, v));
    }
    out.sort_by_key(|a| (a.0, a.1));
    out.into_iter().map(|(_, _, v)| v).collect()
}

fn combine(basis: &[Expr], v: &[BigRational]) -> Expr {
    let mut acc = Expr::zero();
    for (b, c) in basis.iter().zip(v) {
        if !c.is_zero() {
            acc = acc.add(&b.scale(c));
        }
    }
    acc
}

/// Searches flat outputs among polynomials of degree `≤ degree` in the
/// prolonged coordinates. Outputs are ordered by decreasing `κ`.
pub fn search_flat_outputs(ps: &ProlongedSystem, degree: u32) -> Result<Option<Vec<Expr>>, FlatnessError> {
    let mut kappa = brunovsky_indices(ps)?;
    kappa.sort_unstable_by(|a, b| b.cmp(a));
    let monos = ansatz_monomials(ps, degree.max(1));
    let basis: Vec<Expr> = monos
        .into_iter()
        .map(|m| Expr::from_poly(Poly::term(m, BigRational::one())))
        .collect();
    let mut pools: BTreeMap<usize, Vec<Expr>> = BTreeMap::new();
    for &k in &kappa {
        if pools.contains_key(&k) {
            continue;
        }
        let gens: Vec<VectorField> = if k >= 2 {
            ps.g_level(k - 2).generators().to_vec()
        } else {
            Vec::new()
        };
        let rows = annihilation_rows(&gens, &basis);
        let mut pool: Vec<Expr> = nullspace(rows, basis.len())
            .iter()
            .map(|v| combine(&basis, v))
            .filter(|y| annihilation_failure(ps, y, k).is_none())
            .collect();
        // Lowest degree first; the sort is stable, so sparsity order is kept.
        pool.sort_by_key(|y| y.numer().total_degree());
        pools.insert(k, pool);
    }
    let slots: Vec<&Vec<Expr>> = kappa.iter().map(|k| &pools[k]).collect();
    if slots.iter().any(|p| p.is_empty()) {
        return Ok(None);
    }
    let mut idx = vec![0usize; slots.len()];
    let mut tried = 0;
    loop {
        let distinct = idx
            .iter()
            .enumerate()
            .all(|(a, &i)| idx[..a].iter().enumerate().all(|(b, &jj)| !(kappa[a] == kappa[b] && i == jj)));
        if distinct {
            tried += 1;
            let ys: Vec<Expr> = idx.iter().zip(&slots).map(|(&i, p)| p[i].clone()).collect();
            if verify_flat_output(ps, &ys)?.valid {
                return Ok(Some(ys));
            }
            if tried >= MAX_COMBINATIONS {
                return Ok(None);
            }
        }
        // Odometer over the slot pools, last slot fastest.
        let mut s = slots.len();
        loop {
            if s == 0 {
                return Ok(None);
            }
            s -= 1;
            idx[s] += 1;
            if idx[s] < slots[s].len() {
                break;
            }
            idx[s] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_permutations() {
        assert_eq!(permutations(&[4, 8]), vec![vec![8, 4], vec![4, 8]]);
        assert_eq!(permutations(&[4, 4]), vec![vec![4, 4]]);
        assert_eq!(permutations(&[2, 1, 1]).len(), 3);
    }

    #[test]
    fn nullspace_of_one_equation() {
        let q = |v: i64| BigRational::from_integer(v.into());
        // c0 + 2 c1 = 0 over three unknowns.
        let ns = nullspace(vec![vec![q(1), q(2), q(0)]], 3);
        assert_eq!(ns.len(), 2);
        assert_eq!(ns[0], vec![q(0), q(0), q(1)]);
        assert_eq!(ns[1], vec![q(-2), q(1), q(0)]);
    }
}
