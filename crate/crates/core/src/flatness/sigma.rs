//! The σ numbers: componentwise minimal prolongation orders for which `Δ_k`
//! is involutive, resp. `[Γ_k, Δ_k] ⊆ Δ_k`.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::jetgeom::{GeomError, MultiIndex};

use super::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// `Δ_k` involutive.
    Delta,
    /// `[Γ_k, Δ_k] ⊆ Δ_k`.
    GammaDelta,
}

/// One component per input channel; `None` is `+∞`. Kept channels are 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SigmaValue(pub Vec<Option<u32>>);

impl SigmaValue {
    pub fn is_infinite(&self) -> bool {
        self.0.iter().any(Option::is_none)
    }

    /// Finite components as a multi-index (`∞` read as 0).
    pub fn finite(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|c| c.unwrap_or(0)).collect())
    }
}

impl std::fmt::Display for SigmaValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|c| c.map_or("∞".to_string(), |v| v.to_string()))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// σ at one recursion step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaStep {
    pub k: usize,
    pub delta: SigmaValue,
    pub gamma_delta: SigmaValue,
    /// Per-channel cap of the search box.
    pub box_limit: u32,
    /// Smallest `l` (by `|l|`, then lexicographically) meeting both
    /// conditions at this `k`.
    pub witness: Option<MultiIndex>,
    /// Whether each C-min vector itself meets its condition; `true` when the
    /// value is 0 or `∞`.
    pub delta_min_holds: bool,
    pub gamma_delta_min_holds: bool,
    /// For an infinite `σ_Δ`: a non-involutive bracket of `Δ_k` at the
    /// largest boxed `l`.
    pub delta_counterexample: Option<String>,
}

/// Memoised condition outcomes of one initialization, keyed by the capped
/// prolongation order.
#[derive(Default)]
pub struct ConditionCache {
    results: Mutex<HashMap<(Condition, usize, MultiIndex), bool>>,
}

impl ConditionCache {
    pub fn new() -> Self {
        Self::default()
    }
}

/// How far a component can matter: `Δ_k` only sees `min(l_q, k+1)`, and
/// `[Γ_k, Δ_k]` vanishes for components beyond `2k`.
pub fn dependence_cap(cond: Condition, k: usize) -> u32 {
    match cond {
        Condition::Delta => k as u32 + 1,
        Condition::GammaDelta => (2 * k).max(k + 1) as u32,
    }
}

/// `max(k+1, 2k+1, max_prolong)`.
pub fn box_limit(k: usize, max_prolong: u32) -> u32 {
    ((k + 1).max(2 * k + 1) as u32).max(max_prolong)
}

/// Evaluates `cond` at level `k` for the prolongation `l` (full length,
/// original channel order).
pub fn condition_holds(
    ws: &Workspace,
    cache: &ConditionCache,
    cond: Condition,
    k: usize,
    l: &MultiIndex,
    limit: u32,
) -> Result<bool, GeomError> {
    let cap = dependence_cap(cond, k).min(limit).max(1);
    let key_l = MultiIndex(l.0.iter().map(|&v| v.min(cap)).collect());
    let key = (cond, k, key_l);
    if let Some(&r) = cache.results.lock().expect("cache lock").get(&key) {
        return Ok(r);
    }
    let ps = ws.get(&key.2);
    let delta = ps.delta_level(k);
    let holds = match cond {
        Condition::Delta => delta.is_involutive()?,
        Condition::GammaDelta => {
            let gamma = ps.gamma_level(k);
            let mut ok = true;
            'outer: for g in gamma.generators() {
                for d in delta.generators() {
                    let br = g.lie_bracket(d)?;
                    if !br.is_zero() && !delta.contains(&br)? {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            ok
        }
    };
    cache.results.lock().expect("cache lock").insert(key, holds);
    Ok(holds)
}

/// All tuples over `prolonged` channels with components in `1..=hi`,
/// ordered by `|l|` then lexicographically; other channels are 0.
pub fn box_tuples(m: usize, prolonged: &[usize], hi: u32) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zeros(m)];
    for &q in prolonged {
        let mut next = Vec::with_capacity(out.len() * hi as usize);
        for t in &out {
            for v in 1..=hi {
                let mut t = t.clone();
                t.0[q] = v;
                next.push(t);
            }
        }
        out = next;
    }
    out.sort_by(|a, b| a.abs().cmp(&b.abs()).then_with(|| a.cmp(b)));
    out
}

fn sigma_of(
    ws: &Workspace,
    cache: &ConditionCache,
    cond: Condition,
    k: usize,
    prolonged: &[usize],
    limit: u32,
) -> Result<(SigmaValue, bool), GeomError> {
    let m = ws.system().m();
    let hi = dependence_cap(cond, k).min(limit).max(1);
    let tuples = box_tuples(m, prolonged, hi);
    let mut sat = Vec::new();
    for t in &tuples {
        if condition_holds(ws, cache, cond, k, t, limit)? {
            sat.push(t);
        }
    }
    let mut value = vec![Some(0); m];
    if sat.is_empty() {
        for &q in prolonged {
            value[q] = None;
        }
        return Ok((SigmaValue(value), true));
    }
    if sat.len() == tuples.len() {
        return Ok((SigmaValue(value), true));
    }
    let mut cmin = sat[0].clone();
    for t in &sat[1..] {
        cmin = cmin.cmin(t);
    }
    let holds = condition_holds(ws, cache, cond, k, &cmin, limit)?;
    for &q in prolonged {
        value[q] = Some(cmin.0[q]);
    }
    Ok((SigmaValue(value), holds))
}

/// σ_Δ(k) and σ_{Γ,Δ}(k) for the channels in `prolonged`, over the box
/// `[1, box_limit]` per channel.
pub fn sigma(
    ws: &Workspace,
    cache: &ConditionCache,
    prolonged: &[usize],
    k: usize,
    max_prolong: u32,
) -> Result<SigmaStep, GeomError> {
    let limit = box_limit(k, max_prolong);
    let (delta, delta_min_holds) = sigma_of(ws, cache, Condition::Delta, k, prolonged, limit)?;
    let (gamma_delta, gamma_delta_min_holds) =
        sigma_of(ws, cache, Condition::GammaDelta, k, prolonged, limit)?;
    let m = ws.system().m();
    let hi = dependence_cap(Condition::GammaDelta, k).min(limit).max(1);
    let mut witness = None;
    for t in box_tuples(m, prolonged, hi) {
        if condition_holds(ws, cache, Condition::Delta, k, &t, limit)?
            && condition_holds(ws, cache, Condition::GammaDelta, k, &t, limit)?
        {
            witness = Some(t);
            break;
        }
    }
    let delta_counterexample = if delta.is_infinite() {
        let mut l = MultiIndex::zeros(m);
        for &q in prolonged {
            l.0[q] = dependence_cap(Condition::Delta, k).min(limit);
        }
        let ps = ws.get(&l);
        let d = ps.delta_level(k);
        d.involutivity_witness()?.map(|(a, b, _)| {
            let names = ps.system().as_ref();
            format!(
                "Δ_{k}^{l} is not involutive: [{}, {}] ∉ Δ_{k}",
                d.generators()[a].render(names),
                d.generators()[b].render(names)
            )
        })
    } else {
        None
    };
    Ok(SigmaStep {
        k,
        delta,
        gamma_delta,
        box_limit: limit,
        witness,
        delta_min_holds,
        gamma_delta_min_holds,
        delta_counterexample,
    })
}
