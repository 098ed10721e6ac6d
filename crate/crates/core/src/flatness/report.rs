use std::fmt::Write as _;

use serde::Serialize;

use crate::jetgeom::MultiIndex;
use crate::sysdsl::SystemDef;

use super::analyze::InitOutcome;
use super::sigma::{SigmaStep, SigmaValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "p2_flat")]
    P2Flat,
    #[serde(rename = "not_p2_flat")]
    NotP2Flat,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::P2Flat => "p2_flat",
            Verdict::NotP2Flat => "not_p2_flat",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaStepReport {
    pub k: usize,
    pub sigma_delta: SigmaValue,
    pub sigma_gamma_delta: SigmaValue,
    pub witness_l: Option<MultiIndex>,
}

impl SigmaStepReport {
    pub fn from_step(s: &SigmaStep) -> Self {
        SigmaStepReport {
            k: s.k,
            sigma_delta: s.delta.clone(),
            sigma_gamma_delta: s.gamma_delta.clone(),
            witness_l: s.witness.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InitReport {
    /// Channels kept at order 0, 1-based.
    pub kept: Vec<usize>,
    pub variant: &'static str,
    pub outcome: &'static str,
    pub candidate: Option<MultiIndex>,
    pub result: Option<MultiIndex>,
    pub trace: Vec<SigmaStepReport>,
    pub witness: Option<String>,
}

impl InitReport {
    pub fn from_outcome(o: &InitOutcome) -> Self {
        InitReport {
            kept: o.init.kept.iter().map(|i| i + 1).collect(),
            variant: o.init.variant.name(),
            outcome: o.status.name(),
            candidate: o.candidate.clone(),
            result: match &o.status {
                super::InitStatus::Success(j) => Some(j.clone()),
                _ => None,
            },
            trace: o.trace.iter().map(SigmaStepReport::from_step).collect(),
            witness: o.witness.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CrossCheckSummary {
    pub agreements: usize,
    pub disagreements: usize,
    pub skipped: usize,
}

/// Outcome of [`analyze`](super::analyze). Field order is the JSON key
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub system: String,
    pub verdict: Verdict,
    pub j_min: Option<MultiIndex>,
    pub input_permutation: Option<Vec<usize>>,
    pub k_star: Option<usize>,
    pub kappa: Option<Vec<usize>>,
    pub flat_outputs: Option<Vec<String>>,
    pub sigma_trace: Vec<SigmaStepReport>,
    pub singular_locus: Vec<String>,
    pub seed: u64,
    pub timings_ms: Option<u64>,
    /// Why the system is not flat by pure prolongation.
    pub witness: Option<String>,
    /// Which budget ran out for an inconclusive verdict.
    pub reason: Option<String>,
    pub initializations: Vec<InitReport>,
    pub warnings: Vec<String>,
    pub cross_check: CrossCheckSummary,
}

impl AnalysisReport {
    pub fn new(sys: &SystemDef, seed: u64) -> Self {
        AnalysisReport {
            system: sys.name.clone(),
            verdict: Verdict::Inconclusive,
            j_min: None,
            input_permutation: None,
            k_star: None,
            kappa: None,
            flat_outputs: None,
            sigma_trace: Vec::new(),
            singular_locus: Vec::new(),
            seed,
            timings_ms: None,
            witness: None,
            reason: None,
            initializations: Vec::new(),
            warnings: Vec::new(),
            cross_check: CrossCheckSummary::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }

    /// Human-readable rendering: initializations and their σ steps first,
    /// then the verdict.
    pub fn to_text(&self, trace: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "system: {}", self.system);
        if !self.initializations.is_empty() {
            let _ = writeln!(s, "initializations:");
            for i in &self.initializations {
                let _ = write!(s, "  keep {:?} ({}): {}", i.kept, i.variant, i.outcome);
                if let Some(j) = &i.result {
                    let _ = write!(s, " j = {j}");
                } else if let Some(c) = &i.candidate {
                    let _ = write!(s, " candidate {c}");
                }
                let _ = writeln!(s);
                if trace {
                    for t in &i.trace {
                        let _ = writeln!(
                            s,
                            "    k = {}: σ_Δ = {}, σ_ΓΔ = {}{}",
                            t.k,
                            t.sigma_delta,
                            t.sigma_gamma_delta,
                            t.witness_l
                                .as_ref()
                                .map(|l| format!(", first l = {l}"))
                                .unwrap_or_default()
                        );
                    }
                }
                if let Some(w) = &i.witness {
                    let _ = writeln!(s, "    {w}");
                }
            }
        }
        let _ = writeln!(s, "verdict: {}", self.verdict.as_str());
        if let Some(j) = &self.j_min {
            let _ = writeln!(s, "j_min: {j}");
        }
        if let Some(k) = self.k_star {
            let _ = writeln!(s, "k*: {k}");
        }
        if let Some(k) = &self.kappa {
            let _ = writeln!(s, "kappa: {}", MultiIndex(k.iter().map(|&v| v as u32).collect()));
        }
        if let Some(ys) = &self.flat_outputs {
            let _ = writeln!(s, "flat outputs: {}", ys.join(", "));
        }
        if !self.singular_locus.is_empty() {
            let _ = writeln!(s, "singular locus: {} ≠ 0", self.singular_locus.join(", "));
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "witness: {w}");
        }
        if let Some(r) = &self.reason {
            let _ = writeln!(s, "inconclusive: {r}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}
