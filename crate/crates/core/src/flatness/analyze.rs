//! The prolongation search over all initializations.

use std::sync::Arc;

use rayon::prelude::*;

use crate::expr::{Expr, Var};
use crate::jetgeom::{Distribution, GeomError, MultiIndex, VectorField};
use crate::sysdsl::SystemDef;

use super::cns::{brunovsky_indices, cns_check, g_profile, static_linearizable};
use super::outputs::{search_flat_outputs, verify_flat_output};
use super::report::{AnalysisReport, CrossCheckSummary, InitReport, SigmaStepReport, Verdict};
use super::sigma::{condition_holds, sigma, Condition, ConditionCache, SigmaStep};
use super::{AnalysisOptions, Workspace};

/// Upper bound on prolongations tried above the σ candidate when the final
/// check rejects it.
const UPWARD_CHECKS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// First prolonged channel starts at order 2.
    Standard,
    /// First prolonged channel starts at order 1.
    Eager,
}

impl Variant {
    pub fn floor(self) -> u32 {
        match self {
            Variant::Standard => 2,
            Variant::Eager => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Eager => "eager",
        }
    }
}

/// Channels kept at order 0 (0-based) and the start variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Initialization {
    pub kept: Vec<usize>,
    pub variant: Variant,
}

impl Initialization {
    pub fn prolonged(&self, m: usize) -> Vec<usize> {
        (0..m).filter(|q| !self.kept.contains(q)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitStatus {
    /// The candidate passed the final check.
    Success(MultiIndex),
    /// Some `σ` was infinite: no prolongation works from this start.
    Certificate,
    /// `max_k` was reached before `Δ` stabilised.
    Budget,
    /// The candidate and the prolongations tried above it all failed.
    Exhausted,
}

impl InitStatus {
    pub fn name(&self) -> &'static str {
        match self {
            InitStatus::Success(_) => "success",
            InitStatus::Certificate => "certificate",
            InitStatus::Budget => "budget",
            InitStatus::Exhausted => "exhausted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitOutcome {
    pub init: Initialization,
    pub status: InitStatus,
    /// C-max of the floor and every σ up to the last step.
    pub candidate: Option<MultiIndex>,
    pub trace: Vec<SigmaStep>,
    pub witness: Option<String>,
    pub warnings: Vec<String>,
}

/// Kept sets `P` (`1 ≤ |P| ≤ m−1`, by size then lexicographically) whose
/// `{∂/∂u_p, ad_{g₀} ∂/∂u_p : p ∈ P}` is involutive.
pub fn initializations(ws: &Workspace) -> Result<Vec<Initialization>, GeomError> {
    let m = ws.system().m();
    let ps = ws.get(&MultiIndex::zeros(m));
    let mut out = Vec::new();
    for size in 1..m {
        for kept in subsets(m, size) {
            let mut gens: Vec<VectorField> = Vec::new();
            for &p in &kept {
                let v = Var::Input(p as u16 + 1, 0);
                gens.push(ps.ad_coordinate(v, 0));
                gens.push(ps.ad_coordinate(v, 1));
            }
            let h1 = Distribution::new(ps.space().clone(), gens, ws.context().clone());
            if h1.is_involutive()? {
                for variant in [Variant::Standard, Variant::Eager] {
                    out.push(Initialization {
                        kept: kept.clone(),
                        variant,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, size, &mut Vec::new(), &mut out);
    out
}

/// Lazily extended σ trace shared by both variants of one kept set.
struct SigmaRun<'a> {
    ws: &'a Workspace,
    cache: ConditionCache,
    prolonged: Vec<usize>,
    max_prolong: u32,
    steps: Vec<SigmaStep>,
}

impl SigmaRun<'_> {
    fn step(&mut self, k: usize) -> Result<&SigmaStep, GeomError> {
        while self.steps.len() < k {
            let next = self.steps.len() + 1;
            let s = sigma(self.ws, &self.cache, &self.prolonged, next, self.max_prolong)?;
            self.steps.push(s);
        }
        Ok(&self.steps[k - 1])
    }

    fn holds(&self, cond: Condition, k: usize, l: &MultiIndex) -> Result<bool, GeomError> {
        let limit = super::sigma::box_limit(k, self.max_prolong);
        condition_holds(self.ws, &self.cache, cond, k, l, limit)
    }
}

fn run_variant(
    run: &mut SigmaRun<'_>,
    init: &Initialization,
    opts: &AnalysisOptions,
) -> Result<InitOutcome, GeomError> {
    let sys = run.ws.system().clone();
    let (n, m) = (sys.n(), sys.m());
    let max_k = opts.max_k_for(&sys);
    let mut c = MultiIndex::zeros(m);
    for &q in &run.prolonged {
        c.0[q] = init.variant.floor();
    }
    let mut warnings = Vec::new();
    let mut stopped = false;
    let mut last_k = 0;
    for k in 1..=max_k {
        last_k = k;
        let step = run.step(k)?.clone();
        if !step.delta_min_holds {
            warnings.push(format!("σ_Δ({k}) = {} does not itself satisfy the condition", step.delta));
        }
        if !step.gamma_delta_min_holds {
            warnings.push(format!(
                "σ_ΓΔ({k}) = {} does not itself satisfy the condition",
                step.gamma_delta
            ));
        }
        if step.delta.is_infinite() || step.gamma_delta.is_infinite() {
            let witness = step.delta_counterexample.clone().or_else(|| {
                Some(format!("[Γ_{k}, Δ_{k}] ⊄ Δ_{k} for every boxed prolongation"))
            });
            return Ok(InitOutcome {
                init: init.clone(),
                status: InitStatus::Certificate,
                candidate: None,
                trace: run.steps[..k].to_vec(),
                witness,
                warnings,
            });
        }
        c = c.cmax(&step.delta.finite()).cmax(&step.gamma_delta.finite());
        if k > c.max_component() as usize {
            let ps = run.ws.get(&c);
            if ps.delta_level(k).rank()? == n + m
                && run.holds(Condition::Delta, k, &c)?
                && run.holds(Condition::GammaDelta, k, &c)?
            {
                stopped = true;
                break;
            }
        }
        if k > n + c.abs() as usize + 1 {
            stopped = true;
            break;
        }
    }
    let trace = run.steps[..last_k].to_vec();
    if !stopped {
        return Ok(InitOutcome {
            init: init.clone(),
            status: InitStatus::Budget,
            candidate: Some(c),
            trace,
            witness: Some(format!("Δ did not stabilise within max_k = {max_k}")),
            warnings,
        });
    }
    let ws = run.ws;
    let status = if cns_check(&ws.get(&c))?.holds {
        InitStatus::Success(c.clone())
    } else {
        let mut found = None;
        for l in upward(&c, &run.prolonged, UPWARD_CHECKS) {
            if cns_check(&ws.get(&l))?.holds {
                found = Some(l);
                break;
            }
        }
        match found {
            Some(l) => InitStatus::Success(l),
            None => InitStatus::Exhausted,
        }
    };
    let witness = match &status {
        InitStatus::Exhausted => Some(format!(
            "the final check rejects {c} and the {UPWARD_CHECKS} prolongations above it"
        )),
        _ => None,
    };
    Ok(InitOutcome {
        init: init.clone(),
        status,
        candidate: Some(c),
        trace,
        witness,
        warnings,
    })
}

/// Prolongations `l ≥ c` differing on `prolonged` channels, by `|l|` then
/// lexicographically, excluding `c` itself.
fn upward(c: &MultiIndex, prolonged: &[usize], limit: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if prolonged.is_empty() {
        return out;
    }
    let mut extra = 1u32;
    while out.len() < limit {
        let mut level = Vec::new();
        compositions(extra, prolonged.len(), &mut Vec::new(), &mut level);
        let mut cands: Vec<MultiIndex> = level
            .into_iter()
            .map(|d| {
                let mut l = c.clone();
                for (i, &q) in prolonged.iter().enumerate() {
                    l.0[q] += d[i];
                }
                l
            })
            .collect();
        cands.sort();
        for l in cands {
            if out.len() == limit {
                break;
            }
            out.push(l);
        }
        extra += 1;
    }
    out
}

fn compositions(total: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if cur.len() + 1 == parts {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for v in 0..=total {
        cur.push(v);
        compositions(total - v, parts, cur, out);
        cur.pop();
    }
}

/// Runs both variants of every initialization sharing the kept set `kept`.
fn run_kept_set(
    ws: &Workspace,
    kept: &[usize],
    inits: &[Initialization],
    opts: &AnalysisOptions,
) -> Result<Vec<InitOutcome>, GeomError> {
    let sys = ws.system().clone();
    let mut run = SigmaRun {
        ws,
        cache: ConditionCache::new(),
        prolonged: inits[0].prolonged(sys.m()),
        max_prolong: opts.max_prolong_for(&sys),
        steps: Vec::new(),
    };
    debug_assert!(inits.iter().all(|i| i.kept == kept));
    inits.iter().map(|init| run_variant(&mut run, init, opts)).collect()
}

fn sort_key(j: &MultiIndex) -> (u32, MultiIndex) {
    (j.abs(), j.clone())
}

/// Decides pure-prolongation flatness of `sys`.
pub fn analyze(sys: &SystemDef, opts: &AnalysisOptions) -> AnalysisReport {
    let sys = Arc::new(sys.clone());
    let ctx = opts.context(&sys);
    let ws = Workspace::new(sys.clone(), ctx.clone());
    let mut report = AnalysisReport::new(&sys, opts.seed);
    if let Err(e) = analyze_into(&ws, opts, &mut report) {
        report.verdict = Verdict::Inconclusive;
        report.reason = Some(format!("sampling: {e}"));
    }
    let mut seen = std::collections::HashSet::new();
    report.warnings.retain(|w| seen.insert(w.clone()));
    let stats = &ctx.stats;
    report.cross_check = CrossCheckSummary {
        agreements: stats.agreements(),
        disagreements: stats.disagreements(),
        skipped: stats.skipped(),
    };
    if stats.disagreements() > 0 {
        report
            .warnings
            .push(format!("{} symbolic rank cross-checks disagreed", stats.disagreements()));
    }
    report
}

fn analyze_into(ws: &Workspace, opts: &AnalysisOptions, report: &mut AnalysisReport) -> Result<(), GeomError> {
    let sys = ws.system().clone();
    let (n, m) = (sys.n(), sys.m());
    let stat = static_linearizable(ws)?;
    if stat.linearizable {
        return finish_flat(ws, MultiIndex::zeros(m), opts, report);
    }
    if m == 1 {
        report.verdict = Verdict::NotP2Flat;
        report.witness = Some(match stat.profile.first_non_involutive {
            Some(k) => format!("single input and G_{k} is not involutive"),
            None => format!(
                "single input and rank G_k stops at {} < {}",
                stat.profile.max_rank(),
                n + m
            ),
        });
        return Ok(());
    }
    if stat.profile.all_involutive() {
        report.verdict = Verdict::NotP2Flat;
        report.witness = Some(format!(
            "every G_k is involutive but rank G_k stops at {} < {}; prolongation cannot restore controllability",
            stat.profile.max_rank(),
            n + m
        ));
        return Ok(());
    }
    let inits = initializations(ws)?;
    if inits.is_empty() {
        report.verdict = Verdict::Inconclusive;
        report.reason = Some("no_involutive_initialization".into());
        return Ok(());
    }
    let mut groups: Vec<Vec<Initialization>> = Vec::new();
    for init in inits {
        match groups.last_mut() {
            Some(g) if g[0].kept == init.kept => g.push(init),
            _ => groups.push(vec![init]),
        }
    }
    let run_group = |g: &Vec<Initialization>| {
        let local = ws.fork();
        run_kept_set(&local, &g[0].kept, g, opts)
    };
    let results: Vec<Result<Vec<InitOutcome>, GeomError>> = if opts.parallel {
        groups.par_iter().map(run_group).collect()
    } else {
        groups.iter().map(run_group).collect()
    };
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.extend(r?);
    }
    for o in &outcomes {
        report.warnings.extend(o.warnings.iter().map(|w| {
            format!("initialization keeping {:?} ({}): {w}", one_based(&o.init.kept), o.init.variant.name())
        }));
    }
    report.initializations = outcomes.iter().map(InitReport::from_outcome).collect();
    let best = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| match &o.status {
            InitStatus::Success(j) => Some((sort_key(j), i, j.clone())),
            _ => None,
        })
        .min();
    let trace_of = |o: &InitOutcome| o.trace.iter().map(SigmaStepReport::from_step).collect();
    match best {
        Some((_, i, j)) => {
            report.sigma_trace = trace_of(&outcomes[i]);
            finish_flat(ws, j, opts, report)
        }
        None => {
            report.sigma_trace = trace_of(&outcomes[0]);
            if outcomes.iter().all(|o| o.status == InitStatus::Certificate) {
                report.verdict = Verdict::NotP2Flat;
                let parts: Vec<String> = outcomes
                    .iter()
                    .map(|o| {
                        format!(
                            "keeping {:?} ({}): {}",
                            one_based(&o.init.kept),
                            o.init.variant.name(),
                            o.witness.clone().unwrap_or_default()
                        )
                    })
                    .collect();
                report.witness = Some(parts.join("; "));
            } else {
                report.verdict = Verdict::Inconclusive;
                let budget = outcomes.iter().any(|o| o.status == InitStatus::Budget);
                report.reason = Some(if budget { "max_k" } else { "max_prolong" }.into());
            }
            Ok(())
        }
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn finish_flat(
    ws: &Workspace,
    j: MultiIndex,
    opts: &AnalysisOptions,
    report: &mut AnalysisReport,
) -> Result<(), GeomError> {
    let sys = ws.system().clone();
    let (n, m) = (sys.n(), sys.m());
    let ps = ws.get(&j);
    let cns = cns_check(&ps)?;
    if !cns.consistent() {
        report.warnings.push(format!(
            "the condition check ({}) and the linearizability test ({}) disagree at {j}",
            cns.holds, cns.linearizable
        ));
    }
    let profile = g_profile(&ps)?;
    let k_star = profile.k_star;
    let kappa = match brunovsky_indices(&ps) {
        Ok(k) => k,
        Err(_) => {
            report.verdict = Verdict::Inconclusive;
            report.reason = Some("final_check_failed".into());
            return Ok(());
        }
    };
    report.verdict = Verdict::P2Flat;
    report.input_permutation = Some(j.sorting_permutation());
    report.j_min = Some(j.clone());
    report.k_star = Some(k_star);
    report.kappa = Some(kappa.clone());

    let outputs = declared_outputs(&sys, &ps)
        .or_else(|| search_flat_outputs(&ps, opts.ansatz_degree).ok().flatten());
    report.flat_outputs = outputs.map(|ys| ys.iter().map(|y| y.render(sys.as_ref())).collect());

    let mut locus = std::collections::BTreeSet::new();
    for k in 0..=k_star {
        for f in ps.g_level(k).singular_factors()? {
            let text = Expr::from_poly(f.factor.clone()).render(sys.as_ref());
            if f.vanishes_at_base {
                report
                    .warnings
                    .push(format!("singular factor {text} vanishes at the base point"));
            }
            locus.insert(text);
        }
    }
    report.singular_locus = locus.into_iter().collect();

    let abs = j.abs() as usize;
    if k_star > n + abs {
        report.warnings.push(format!("bound violated: k★ = {k_star} > n + |j| = {}", n + abs));
    }
    if ps.delta_level(k_star).rank()? == n + m {
        let lower = j.max_component() as usize;
        if k_star < lower || k_star * m < n + abs {
            report.warnings.push(format!(
                "bound violated: k★ = {k_star} < max(j_m, (n+|j|)/m) = max({lower}, {}/{m})",
                n + abs
            ));
        }
    }
    let sum: usize = kappa.iter().sum();
    if sum != n + m + abs {
        report
            .warnings
            .push(format!("bound violated: Σκ = {sum} ≠ n + m + |j| = {}", n + m + abs));
    }
    if kappa.first() != Some(&(k_star + 1)) {
        report.warnings.push(format!("bound violated: κ₁ ≠ k★ + 1 = {}", k_star + 1));
    }
    Ok(())
}

fn declared_outputs(sys: &SystemDef, ps: &crate::prolong::ProlongedSystem) -> Option<Vec<Expr>> {
    let ys = sys.declared_flat_outputs.clone()?;
    match verify_flat_output(ps, &ys) {
        Ok(check) if check.valid => Some(ys),
        _ => None,
    }
}
