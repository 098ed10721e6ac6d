//! Pure prolongations and the filtrations `G_k`, `Γ_k`, `Δ_k`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::expr::{Expr, Var};
use crate::jetgeom::{Distribution, GeomError, JetSpace, MultiIndex, RankContext, VectorField};
use crate::sysdsl::SystemDef;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProlongError {
    #[error("index out of domain: {0}")]
    DomainError(String),
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiltrationKind {
    G,
    Gamma,
    Delta,
}

/// Levels `0..=k_max` of one filtration.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub kind: FiltrationKind,
    pub levels: Vec<Arc<Distribution>>,
    /// First `k` with `rank_k = rank_{k+1}`, when reached within the levels.
    pub k_star: Option<usize>,
}

/// The system prolonged by `j` integrators per channel:
/// `g₀ = f·∂x + Σ_i Σ_{k<j_i} u_i^(k+1) ∂/∂u_i^(k)`, `g_i = ∂/∂u_i^(j_i)`.
pub struct ProlongedSystem {
    sys: Arc<SystemDef>,
    space: Arc<JetSpace>,
    g0: VectorField,
    gi: Vec<VectorField>,
    ctx: Arc<RankContext>,
    chains: Mutex<HashMap<Var, Vec<VectorField>>>,
    levels: Mutex<HashMap<(FiltrationKind, usize), Arc<Distribution>>>,
}

impl std::fmt::Debug for ProlongedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProlongedSystem({}, j={})", self.sys.name, self.space.j())
    }
}

/// Builds the pure prolongation of order `j` (one entry per input, in the
/// system's own input order).
pub fn build_prolonged(sys: Arc<SystemDef>, j: MultiIndex, ctx: Arc<RankContext>) -> ProlongedSystem {
    assert_eq!(j.len(), sys.m(), "one prolongation order per input");
    let space = Arc::new(JetSpace::new(sys.n(), j.clone()));
    let mut coeffs: Vec<(Var, Expr)> = sys
        .f
        .iter()
        .enumerate()
        .map(|(i, e)| (Var::State(i as u16 + 1), e.clone()))
        .collect();
    for (i, &ji) in j.0.iter().enumerate() {
        let ch = i as u16 + 1;
        for k in 0..ji as u16 {
            coeffs.push((Var::Input(ch, k), Expr::input(ch, k + 1)));
        }
    }
    let g0 = VectorField::from_coeffs(space.clone(), coeffs);
    let gi = (0..sys.m())
        .map(|i| VectorField::coordinate(space.clone(), space.top_input(i)))
        .collect();
    ProlongedSystem {
        sys,
        space,
        g0,
        gi,
        ctx,
        chains: Mutex::new(HashMap::new()),
        levels: Mutex::new(HashMap::new()),
    }
}

impl ProlongedSystem {
    pub fn system(&self) -> &Arc<SystemDef> {
        &self.sys
    }

    pub fn j(&self) -> &MultiIndex {
        self.space.j()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn context(&self) -> &Arc<RankContext> {
        &self.ctx
    }

    pub fn g0(&self) -> &VectorField {
        &self.g0
    }

    /// `g_i = ∂/∂u_i^(j_i)`, `i` 0-based.
    pub fn gi(&self, i: usize) -> &VectorField {
        &self.gi[i]
    }

    pub fn m(&self) -> usize {
        self.gi.len()
    }

    /// `ad^r_{g₀} ∂/∂v` for a coordinate `v`, memoised along the chain.
    pub fn ad_coordinate(&self, v: Var, r: usize) -> VectorField {
        let mut chains = self.chains.lock().expect("chain lock");
        let chain = chains
            .entry(v)
            .or_insert_with(|| vec![VectorField::coordinate(self.space.clone(), v)]);
        while chain.len() <= r {
            let next = self
                .g0
                .lie_bracket(chain.last().unwrap())
                .expect("same space");
            chain.push(next);
        }
        chain[r].clone()
    }

    /// `ad^r_{g₀} g_i`.
    pub fn ad_gi(&self, i: usize, r: usize) -> VectorField {
        self.ad_coordinate(self.space.top_input(i), r)
    }

    fn cached(&self, kind: FiltrationKind, k: usize, build: impl FnOnce() -> Vec<VectorField>) -> Arc<Distribution> {
        if let Some(d) = self.levels.lock().expect("level lock").get(&(kind, k)) {
            return d.clone();
        }
        let d = Arc::new(Distribution::new(self.space.clone(), build(), self.ctx.clone()));
        self.levels
            .lock()
            .expect("level lock")
            .entry((kind, k))
            .or_insert(d)
            .clone()
    }

    /// `G_k = span{ad^r g_i : r ≤ k}`, generators ordered by `r`, then channel.
    pub fn g_level(&self, k: usize) -> Arc<Distribution> {
        self.cached(FiltrationKind::G, k, || {
            (0..=k)
                .flat_map(|r| (0..self.m()).map(move |i| (r, i)))
                .map(|(r, i)| self.ad_gi(i, r))
                .collect()
        })
    }

    /// `Γ_k = ⊕_p {∂/∂u_p^(j_p − l) : l = 0..min(k, j_p − 1)}`.
    pub fn gamma_level(&self, k: usize) -> Arc<Distribution> {
        self.cached(FiltrationKind::Gamma, k, || {
            let mut gens = Vec::new();
            for (p, &jp) in self.j().0.iter().enumerate() {
                if jp == 0 {
                    continue;
                }
                for l in 0..=(k as u32).min(jp - 1) {
                    let v = Var::Input(p as u16 + 1, (jp - l) as u16);
                    gens.push(VectorField::coordinate(self.space.clone(), v));
                }
            }
            gens
        })
    }

    /// `Δ_k = Σ_p {ad^{l−j_p} ∂/∂u_p^(0) : l = j_p..k}`, by channel then depth.
    pub fn delta_level(&self, k: usize) -> Arc<Distribution> {
        self.cached(FiltrationKind::Delta, k, || {
            let mut gens = Vec::new();
            for (p, &jp) in self.j().0.iter().enumerate() {
                let jp = jp as usize;
                if k < jp {
                    continue;
                }
                for r in 0..=k - jp {
                    gens.push(self.ad_coordinate(Var::Input(p as u16 + 1, 0), r));
                }
            }
            gens
        })
    }

    pub fn level(&self, kind: FiltrationKind, k: usize) -> Arc<Distribution> {
        match kind {
            FiltrationKind::G => self.g_level(k),
            FiltrationKind::Gamma => self.gamma_level(k),
            FiltrationKind::Delta => self.delta_level(k),
        }
    }

    /// Levels `0..=k_max`, with the first `k` where the rank stops growing.
    pub fn filtration(&self, kind: FiltrationKind, k_max: usize) -> Result<Filtration, GeomError> {
        let levels: Vec<_> = (0..=k_max).map(|k| self.level(kind, k)).collect();
        let mut k_star = None;
        for k in 0..k_max {
            if levels[k].rank()? == levels[k + 1].rank()? {
                k_star = Some(k);
                break;
            }
        }
        Ok(Filtration {
            kind,
            levels,
            k_star,
        })
    }

    /// First `k` with `rank G_k = rank G_{k+1}`; never exceeds `n + |j|`.
    pub fn k_star(&self) -> Result<usize, GeomError> {
        let bound = self.space.n() + self.j().abs() as usize;
        for k in 0..=bound {
            if self.g_level(k).rank()? == self.g_level(k + 1).rank()? {
                return Ok(k);
            }
        }
        Ok(bound)
    }

    /// Upper bound on `rank Δ_k`: the generator count, capped by `n` plus
    /// the number of channels present at level `k`.
    pub fn delta_rank_bound(&self, k: usize) -> usize {
        let active: Vec<usize> = self
            .j()
            .0
            .iter()
            .map(|&jp| jp as usize)
            .filter(|&jp| jp <= k)
            .collect();
        let count: usize = active.iter().map(|jp| k - jp + 1).sum();
        count.min(self.space.n() + active.len())
    }

    /// `G_k = Γ_k ⊕ Δ_k`: ranks add up, `Γ_k + Δ_k` spans `G_k`, and
    /// `rank Δ_k` respects its dimension bound.
    pub fn decomposition_check(&self, k: usize) -> Result<bool, GeomError> {
        let g = self.g_level(k);
        let gamma = self.gamma_level(k);
        let delta = self.delta_level(k);
        let (rg, rgam, rdel) = (g.rank()?, gamma.rank()?, delta.rank()?);
        if rg != rgam + rdel || rdel > self.delta_rank_bound(k) {
            return Ok(false);
        }
        let sum = gamma.union(&delta)?;
        if sum.rank()? != rg {
            return Ok(false);
        }
        for v in g.generators() {
            if !sum.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `γ_{k,i}`: `γ₁ = (−1)^{j_i+1} ∂f/∂u_i^(0)`,
/// `γ_{k+1} = L_{g₀} γ_k − (∂f/∂x) γ_k`. `i` is 0-based, `k ≥ 1`.
pub fn gamma_sequence(ps: &ProlongedSystem, i: usize, k: usize) -> Result<Vec<Expr>, ProlongError> {
    if k < 1 {
        return Err(ProlongError::DomainError("γ is defined for k ≥ 1".into()));
    }
    if i >= ps.m() {
        return Err(ProlongError::DomainError(format!("channel {} of {}", i + 1, ps.m())));
    }
    let sys = ps.system();
    let n = sys.n();
    let u = Var::Input(i as u16 + 1, 0);
    let sign = if ps.j().get(i).is_multiple_of(2) { -1 } else { 1 };
    let mut gamma: Vec<Expr> = sys.f.iter().map(|fi| fi.diff(u).mul(&Expr::int(sign))).collect();
    let jac: Vec<Vec<Expr>> = sys
        .f
        .iter()
        .map(|fi| (1..=n as u16).map(|s| fi.diff(Var::State(s))).collect())
        .collect();
    for _ in 1..k {
        gamma = (0..n)
            .map(|r| {
                let mut acc = ps.g0().apply(&gamma[r]);
                for (s, g) in gamma.iter().enumerate() {
                    if !g.is_zero() && !jac[r][s].is_zero() {
                        acc = acc.sub(&jac[r][s].mul(g));
                    }
                }
                acc
            })
            .collect();
    }
    Ok(gamma)
}

/// The field `Σ γ_r ∂/∂x_r`.
pub fn gamma_field(ps: &ProlongedSystem, gamma: &[Expr]) -> VectorField {
    VectorField::from_coeffs(
        ps.space().clone(),
        gamma
            .iter()
            .enumerate()
            .map(|(r, e)| (Var::State(r as u16 + 1), e.clone())),
    )
}

/// Re-expresses a field of the unprolonged system on a larger jet space.
pub fn lift(v: &VectorField, space: &Arc<JetSpace>) -> VectorField {
    VectorField::from_coeffs(space.clone(), v.coeffs().iter().map(|(x, e)| (*x, e.clone())))
}

/// Compares brackets of the prolonged system with those of the original.
///
/// Always checks `ad^k g_i^(j) = (−1)^k ∂/∂u_i^(j_i−k)` for `k ≤ j_i`.
/// For `ν ≥ 1` it also checks that
/// `ad^{j_i+ν} g_i^(j) − (−1)^{j_i} ad^ν g_i^(0)` lies in `G_{j_i+ν−1}^(0)`,
/// which requires the unprolonged `G_k^(0)` to be involutive.
pub fn bracket_comparison_check(ps: &ProlongedSystem, i: usize, nu: usize) -> Result<bool, ProlongError> {
    let ji = ps.j().get(i) as usize;
    for k in 0..=ji {
        let expect = VectorField::coordinate(
            ps.space().clone(),
            Var::Input(i as u16 + 1, (ji - k) as u16),
        );
        let expect = if k % 2 == 0 { expect } else { expect.neg() };
        if ps.ad_gi(i, k) != expect {
            return Ok(false);
        }
    }
    if nu == 0 {
        return Ok(true);
    }
    let base = build_prolonged(
        ps.system().clone(),
        MultiIndex::zeros(ps.m()),
        ps.context().clone(),
    );
    let top = ji + nu - 1;
    let kstar0 = base.k_star()?;
    for k in 0..=top.min(kstar0) {
        if !base.g_level(k).is_involutive()? {
            return Err(ProlongError::PreconditionNotMet(format!(
                "G_{k} of the unprolonged system is not involutive"
            )));
        }
    }
    let lifted = Distribution::new(
        ps.space().clone(),
        base.g_level(top)
            .generators()
            .iter()
            .map(|g| lift(g, ps.space()))
            .collect(),
        ps.context().clone(),
    );
    let mut orig = lift(&base.ad_gi(i, nu), ps.space());
    if ji % 2 == 1 {
        orig = orig.neg();
    }
    let diff = ps.ad_gi(i, ji + nu).sub(&orig)?;
    Ok(lifted.contains(&diff)?)
}
