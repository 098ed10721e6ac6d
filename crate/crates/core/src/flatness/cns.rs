use crate::jetgeom::GeomError;
use crate::prolong::ProlongedSystem;

use super::{FlatnessError, Workspace};
use crate::jetgeom::MultiIndex;

/// Ranks and involutivity of `G_0 ⊆ G_1 ⊆ …` up to stabilisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GProfile {
    pub k_star: usize,
    /// `rank G_k` for `k = 0..=k_star`.
    pub ranks: Vec<usize>,
    pub first_non_involutive: Option<usize>,
}

impl GProfile {
    pub fn max_rank(&self) -> usize {
        *self.ranks.last().unwrap_or(&0)
    }

    pub fn all_involutive(&self) -> bool {
        self.first_non_involutive.is_none()
    }

    /// All levels involutive and the last one is the whole tangent space.
    pub fn linearizable(&self, dim: usize) -> bool {
        self.all_involutive() && self.max_rank() == dim
    }

    /// `ρ_0 = rank G_0`, `ρ_k = rank G_k − rank G_{k−1}`.
    pub fn rho(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.ranks.len());
        for (k, &r) in self.ranks.iter().enumerate() {
            out.push(if k == 0 { r } else { r - self.ranks[k - 1] });
        }
        out
    }

    /// `κ_i = #{l : ρ_l ≥ i}`, `i = 1..m`, non-increasing.
    pub fn kappa(&self, m: usize) -> Vec<usize> {
        let rho = self.rho();
        (1..=m).map(|i| rho.iter().filter(|&&r| r >= i).count()).collect()
    }
}

pub fn g_profile(ps: &ProlongedSystem) -> Result<GProfile, GeomError> {
    let k_star = ps.k_star()?;
    let mut ranks = Vec::with_capacity(k_star + 1);
    let mut first_non_involutive = None;
    for k in 0..=k_star {
        let g = ps.g_level(k);
        ranks.push(g.rank()?);
        if first_non_involutive.is_none() && !g.is_involutive()? {
            first_non_involutive = Some(k);
        }
    }
    Ok(GProfile {
        k_star,
        ranks,
        first_non_involutive,
    })
}

/// Outcome of the static feedback linearization test on the unprolonged
/// system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticCheck {
    pub linearizable: bool,
    pub profile: GProfile,
    /// Brunovský indices when linearizable.
    pub kappa: Option<Vec<usize>>,
}

pub fn static_linearizable(ws: &Workspace) -> Result<StaticCheck, GeomError> {
    let sys = ws.system();
    let ps = ws.get(&MultiIndex::zeros(sys.m()));
    let profile = g_profile(&ps)?;
    let linearizable = profile.linearizable(sys.n() + sys.m());
    let kappa = linearizable.then(|| profile.kappa(sys.m()));
    Ok(StaticCheck {
        linearizable,
        profile,
        kappa,
    })
}

/// Brunovský indices of a linearizable prolonged system, non-increasing.
pub fn brunovsky_indices(ps: &ProlongedSystem) -> Result<Vec<usize>, FlatnessError> {
    let profile = g_profile(ps)?;
    if !profile.linearizable(ps.space().dim()) {
        return Err(FlatnessError::NotLinearizable);
    }
    Ok(profile.kappa(ps.m()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnsViolation {
    /// 1: `Δ_k` not involutive; 2: `[Γ_k, Δ_k] ⊄ Δ_k`; 3: final ranks.
    pub condition: u8,
    pub k: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnsOutcome {
    pub holds: bool,
    pub k_star: usize,
    pub violation: Option<CnsViolation>,
    /// Independent verdict: every `G_k` involutive and `G_{k★}` full.
    pub linearizable: bool,
}

impl CnsOutcome {
    /// Both criteria must agree; a mismatch indicates a numerical or
    /// structural inconsistency.
    pub fn consistent(&self) -> bool {
        self.holds == self.linearizable
    }
}

/// Checks, for `k ≤ k★`: `Δ_k` involutive, `[Γ_k, Δ_k] ⊆ Δ_k`, and at `k★`
/// that `rank Δ = n + m` and `rank Γ = |j|`.
pub fn cns_check(ps: &ProlongedSystem) -> Result<CnsOutcome, GeomError> {
    let profile = g_profile(ps)?;
    let k_star = profile.k_star;
    let linearizable = profile.linearizable(ps.space().dim());
    let violation = first_violation(ps, k_star)?;
    Ok(CnsOutcome {
        holds: violation.is_none(),
        k_star,
        violation,
        linearizable,
    })
}

fn first_violation(ps: &ProlongedSystem, k_star: usize) -> Result<Option<CnsViolation>, GeomError> {
    let names = ps.system().as_ref();
    for k in 0..=k_star {
        let delta = ps.delta_level(k);
        if let Some((a, b, _)) = delta.involutivity_witness()? {
            return Ok(Some(CnsViolation {
                condition: 1,
                k,
                detail: format!(
                    "[{}, {}] is not in Δ_{k}",
                    delta.generators()[a].render(names),
                    delta.generators()[b].render(names)
                ),
            }));
        }
        let gamma = ps.gamma_level(k);
        for g in gamma.generators() {
            for d in delta.generators() {
                let br = g.lie_bracket(d)?;
                if !delta.contains(&br)? {
                    return Ok(Some(CnsViolation {
                        condition: 2,
                        k,
                        detail: format!(
                            "[{}, {}] = {} is not in Δ_{k}",
                            g.render(names),
                            d.render(names),
                            br.render(names)
                        ),
                    }));
                }
            }
        }
    }
    let sys = ps.system();
    let rd = ps.delta_level(k_star).rank()?;
    let rg = ps.gamma_level(k_star).rank()?;
    let abs = ps.j().abs() as usize;
    if rd != sys.n() + sys.m() || rg != abs {
        return Ok(Some(CnsViolation {
            condition: 3,
            k: k_star,
            detail: format!(
                "rank Δ = {rd} (need {}), rank Γ = {rg} (need {abs})",
                sys.n() + sys.m()
            ),
        }));
    }
    Ok(None)
}
