//! Exact linear algebra: rational row reduction and fraction-free symbolic
//! elimination.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::{Expr, Poly};

/// Reduced row echelon basis of a rational row space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rref {
    /// Basis rows; row `r` has a 1 in column `pivots[r]` and 0 in every other
    /// pivot column.
    pub rows: Vec<Vec<BigRational>>,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn new(mut rows: Vec<Vec<BigRational>>) -> Rref {
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
        let ncols = rows.first().map_or(0, Vec::len);
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = BigRational::one() / &rows[r][c];
            for x in rows[r].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        Rref {
            rows,
            pivots,
        }
    }

    /// Reduces `v` against the basis; returns true iff `v` is in the span.
    pub fn contains(&self, v: &[BigRational]) -> bool {
        let mut v = v.to_vec();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if v[c].is_zero() {
                continue;
            }
            let f = v[c].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        v.iter().all(Zero::is_zero)
    }
}

/// Result of fraction-free elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BareissOutcome {
    pub rank: usize,
    /// The last nonzero pivot, an `r × r` minor of the (row-scaled) matrix.
    pub last_pivot: Poly,
}

/// Entry is zero modulo `sin² + cos² = 1`.
fn vanishes(p: &Poly) -> bool {
    p.is_zero() || (p.has_sin() && p.reduce_trig().is_zero())
}

fn pivot_cost(p: &Poly) -> (bool, usize, u32) {
    (!p.is_constant(), p.len(), p.total_degree())
}

/// Generic rank of a matrix of rational functions by Bareiss elimination.
///
/// Each row is first cleared of denominators. Elimination runs in the free
/// ring, where every Bareiss division is exact; only zero tests use the trig
/// relation. Returns `None` when an intermediate entry exceeds `max_terms`.
pub fn bareiss_rank(rows: &[Vec<Expr>], max_terms: usize) -> Option<BareissOutcome> {
    let mut m: Vec<Vec<Poly>> = rows
        .iter()
        .map(|row| {
            let dens: Vec<&Poly> = row.iter().map(|e| e.denom()).collect();
            let l = lcm_all(&dens);
            row.iter()
                .map(|e| {
                    let k = l.div_exact(e.denom()).expect("lcm is a multiple");
                    e.numer().mul(&k)
                })
                .collect()
        })
        .collect();
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut prev = Poly::one();
    let mut rank = 0;
    let mut last = Poly::one();
    for k in 0..nrows.min(ncols) {
        let mut best: Option<(usize, usize)> = None;
        for i in k..nrows {
            for j in k..ncols {
                if vanishes(&m[i][j]) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => pivot_cost(&m[i][j]) < pivot_cost(&m[bi][bj]),
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        let piv = m[k][k].clone();
        for i in k + 1..nrows {
            let a = m[i][k].clone();
            for j in k + 1..ncols {
                let t = piv.mul(&m[i][j]).sub(&a.mul(&m[k][j]));
                let t = t.div_exact(&prev).expect("Bareiss division is exact");
                if t.len() > max_terms {
                    return None;
                }
                m[i][j] = t;
            }
            m[i][k] = Poly::zero();
        }
        prev = piv.clone();
        last = piv;
        rank += 1;
    }
    Some(BareissOutcome {
        rank,
        last_pivot: last,
    })
}

fn lcm_all(ps: &[&Poly]) -> Poly {
    let mut l = Poly::one();
    for p in ps {
        if p.is_one() {
            continue;
        }
        let g = crate::expr::gcd(&l, p);
        l = l.mul(&p.div_exact(&g).expect("gcd divides"));
    }
    l
}
