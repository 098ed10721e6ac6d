use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_rational::BigRational;
use num_traits::Zero;

use super::context::RankContext;
use super::field::VectorField;
use super::linalg::{bareiss_rank, Rref};
use super::space::JetSpace;
use super::GeomError;
use crate::expr::{Expr, ExprError, Poly, RationalPoint, Var};

/// Rank of the generator matrix at one sample point.
#[derive(Clone, Debug)]
pub struct SampleRank {
    pub slot: usize,
    pub attempt: u32,
    pub rank: usize,
    pub rref: Rref,
}

/// A factor whose vanishing drops the rank or makes a coefficient undefined.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SingularFactor {
    pub factor: Poly,
    pub vanishes_at_base: bool,
}

#[derive(Clone, Debug)]
pub struct RankCertificate {
    pub rank: usize,
    pub samples: Vec<SampleRank>,
    /// Index into `samples` of the first point reaching `rank`.
    pub achieved_by: usize,
    /// Rank from the symbolic cross-check, when it ran.
    pub symbolic_rank: Option<usize>,
    pub singular_factors: Vec<SingularFactor>,
}

/// A finite list of generators on a common jet space, with a lazily
/// computed, cached generic rank.
pub struct Distribution {
    space: Arc<JetSpace>,
    gens: Vec<VectorField>,
    ctx: Arc<RankContext>,
    cert: OnceLock<Result<RankCertificate, GeomError>>,
}

impl Clone for Distribution {
    fn clone(&self) -> Self {
        let cert = OnceLock::new();
        if let Some(c) = self.cert.get() {
            let _ = cert.set(c.clone());
        }
        Distribution {
            space: self.space.clone(),
            gens: self.gens.clone(),
            ctx: self.ctx.clone(),
            cert,
        }
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.gens).finish()
    }
}

impl Distribution {
    /// Zero fields are dropped. Panics if a generator lives on another space.
    pub fn new(space: Arc<JetSpace>, gens: Vec<VectorField>, ctx: Arc<RankContext>) -> Self {
        for g in &gens {
            assert!(
                **g.space() == *space,
                "generator on {:?}, expected {space:?}",
                g.space()
            );
        }
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Distribution {
            space,
            gens,
            ctx,
            cert: OnceLock::new(),
        }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.gens
    }

    pub fn context(&self) -> &Arc<RankContext> {
        &self.ctx
    }

    pub fn with_generator(&self, v: VectorField) -> Distribution {
        let mut g = self.gens.clone();
        g.push(v);
        Distribution::new(self.space.clone(), g, self.ctx.clone())
    }

    /// Sum of two distributions on the same space.
    pub fn union(&self, other: &Distribution) -> Result<Distribution, GeomError> {
        if *self.space != *other.space {
            return Err(GeomError::SpaceMismatch);
        }
        let mut g = self.gens.clone();
        g.extend(other.gens.iter().cloned());
        Ok(Distribution::new(self.space.clone(), g, self.ctx.clone()))
    }

    fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for g in &self.gens {
            for e in g.coeffs().values() {
                out.extend(e.vars());
            }
        }
        out
    }

    fn row_at(&self, v: &VectorField, p: &RationalPoint) -> Result<Vec<BigRational>, ExprError> {
        let mut row = vec![BigRational::zero(); self.space.dim()];
        for (x, e) in v.coeffs() {
            let i = self.space.index_of(*x).expect("coordinate of the space");
            row[i] = e.eval_at(p)?;
        }
        Ok(row)
    }

    fn matrix_at(&self, p: &RationalPoint) -> Result<Vec<Vec<BigRational>>, ExprError> {
        self.gens.iter().map(|g| self.row_at(g, p)).collect()
    }

    pub fn certificate(&self) -> Result<&RankCertificate, GeomError> {
        self.cert
            .get_or_init(|| self.compute_certificate())
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Generic rank: the maximum exact rank over the sample points.
    pub fn rank(&self) -> Result<usize, GeomError> {
        Ok(self.certificate()?.rank)
    }

    fn compute_certificate(&self) -> Result<RankCertificate, GeomError> {
        let sampler = self.ctx.sampler;
        let vars = self.vars();
        let mut samples = Vec::with_capacity(sampler.samples);
        if !self.gens.is_empty() {
            for slot in 0..sampler.samples {
                let mut found = None;
                for attempt in 0..sampler.max_attempts {
                    let p = sampler.point(slot, attempt, &vars);
                    match self.matrix_at(&p) {
                        Ok(m) => {
                            let rref = Rref::new(m);
                            found = Some(SampleRank {
                                slot,
                                attempt,
                                rank: rref.rank(),
                                rref,
                            });
                            break;
                        }
                        Err(ExprError::DenominatorVanishes) => continue,
                        Err(e) => panic!("incomplete sample point: {e}"),
                    }
                }
                samples.push(found.ok_or(GeomError::SamplingExhausted)?);
            }
        }
        let rank = samples.iter().map(|s| s.rank).max().unwrap_or(0);
        let achieved_by = samples.iter().position(|s| s.rank == rank).unwrap_or(0);

        let mut symbolic_rank = None;
        let mut singular_factors = BTreeSet::new();
        for g in &self.gens {
            for e in g.coeffs().values() {
                for f in split_factor(e.denom()) {
                    singular_factors.insert(f);
                }
            }
        }
        if !self.gens.is_empty() && self.space.dim() <= self.ctx.cross_check_dim {
            let rows: Vec<Vec<Expr>> = self
                .gens
                .iter()
                .map(|g| self.space.coords().iter().map(|&c| g.coeff(c)).collect())
                .collect();
            let out = bareiss_rank(&rows, self.ctx.max_terms);
            symbolic_rank = out.as_ref().map(|o| o.rank);
            self.ctx
                .stats
                .record(rank, symbolic_rank, || format!("{self:?}"));
            if let Some(o) = out {
                if o.rank == rank {
                    for f in split_factor(&o.last_pivot) {
                        singular_factors.insert(f);
                    }
                }
            }
        }
        let singular_factors = singular_factors
            .into_iter()
            .map(|factor| SingularFactor {
                vanishes_at_base: self.ctx.vanishes_at_base(&factor),
                factor,
            })
            .collect();
        Ok(RankCertificate {
            rank,
            samples,
            achieved_by,
            symbolic_rank,
            singular_factors,
        })
    }

    /// Generic membership: `rank(D + v) = rank(D)`.
    pub fn contains(&self, v: &VectorField) -> Result<bool, GeomError> {
        if **v.space() != *self.space {
            return Err(GeomError::SpaceMismatch);
        }
        if v.is_zero() {
            return Ok(true);
        }
        if self.gens.is_empty() {
            return Ok(false);
        }
        let cert = self.certificate()?;
        if cert.rank == self.space.dim() {
            return Ok(true);
        }
        let mut vars = self.vars();
        for e in v.coeffs().values() {
            vars.extend(e.vars());
        }
        let mut usable = 0;
        for s in cert.samples.iter().filter(|s| s.rank == cert.rank) {
            let p = self.ctx.sampler.point(s.slot, s.attempt, &vars);
            let row = match self.row_at(v, &p) {
                Ok(r) => r,
                Err(ExprError::DenominatorVanishes) => continue,
                Err(e) => panic!("incomplete sample point: {e}"),
            };
            if !s.rref.contains(&row) {
                return Ok(false);
            }
            usable += 1;
        }
        if usable > 0 {
            return Ok(true);
        }
        Ok(self.with_generator(v.clone()).rank()? == cert.rank)
    }

    /// First generator pair `(a, b)`, `a < b`, whose bracket leaves the
    /// distribution, together with that bracket.
    pub fn involutivity_witness(&self) -> Result<Option<(usize, usize, VectorField)>, GeomError> {
        if self.rank()? == self.space.dim() {
            return Ok(None);
        }
        for a in 0..self.gens.len() {
            for b in a + 1..self.gens.len() {
                let br = self.gens[a].lie_bracket(&self.gens[b])?;
                if !self.contains(&br)? {
                    return Ok(Some((a, b, br)));
                }
            }
        }
        Ok(None)
    }

    pub fn is_involutive(&self) -> Result<bool, GeomError> {
        Ok(self.involutivity_witness()?.is_none())
    }

    /// Smallest involutive distribution containing this one.
    ///
    /// Each round brackets all generator pairs in lexicographic order and
    /// adjoins those that fail membership; at most `max_rounds` rounds run.
    pub fn involutive_closure(&self, max_rounds: usize) -> Result<Distribution, GeomError> {
        let mut cur = self.clone();
        let dim = self.space.dim();
        for _ in 0..max_rounds {
            if cur.rank()? == dim {
                return Ok(cur);
            }
            let n = cur.gens.len();
            let mut added = false;
            for a in 0..n {
                for b in a + 1..n {
                    let br = cur.gens[a].lie_bracket(&cur.gens[b])?;
                    if !cur.contains(&br)? {
                        cur = cur.with_generator(br);
                        added = true;
                    }
                }
            }
            if !added {
                return Ok(cur);
            }
        }
        if cur.is_involutive()? {
            Ok(cur)
        } else {
            Err(GeomError::IterationBudgetExceeded)
        }
    }

    /// Exact rank at the base point; `None` if a coefficient is undefined
    /// there or a trig value is irrational.
    pub fn rank_at_base(&self) -> Option<usize> {
        let p = self.ctx.base_rational_point(self.vars())?;
        self.matrix_at(&p).ok().map(|m| Rref::new(m).rank())
    }

    pub fn singular_factors(&self) -> Result<&[SingularFactor], GeomError> {
        Ok(&self.certificate()?.singular_factors)
    }
}

/// Splits a polynomial into its monomial variables and its monic
/// non-monomial remainder; constants yield nothing.
pub fn split_factor(p: &Poly) -> Vec<Poly> {
    if p.is_constant() {
        return Vec::new();
    }
    let content = p.monomial_content();
    let mut out: Vec<Poly> = content.pairs().iter().map(|&(v, _)| Poly::var(v)).collect();
    let rest = if content.is_one() {
        p.clone()
    } else {
        Poly::from_terms(p.terms().map(|(m, c)| (m.div(&content).unwrap(), c.clone())))
    };
    if !rest.is_constant() {
        out.push(rest.monic());
    }
    out
}
