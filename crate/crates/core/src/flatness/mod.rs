//! Static feedback linearizability, the necessary and sufficient condition
//! for a given prolongation, the σ recursion and flat outputs.

mod analyze;
mod cns;
mod outputs;
mod report;
mod sigma;
#[cfg(test)]
mod tests;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::jetgeom::{GeomError, MultiIndex, RankContext, Sampler};
use crate::prolong::{build_prolonged, ProlongedSystem};
use crate::sysdsl::SystemDef;

pub use analyze::{analyze, initializations, InitOutcome, InitStatus, Initialization, Variant};
pub use cns::{brunovsky_indices, cns_check, g_profile, static_linearizable, CnsOutcome, CnsViolation, GProfile, StaticCheck};
pub use outputs::{gradient_rank, search_flat_outputs, verify_flat_output, FlatOutputCheck};
pub use report::{AnalysisReport, CrossCheckSummary, InitReport, SigmaStepReport, Verdict};
pub use sigma::{box_limit, condition_holds, sigma, Condition, ConditionCache, SigmaStep, SigmaValue};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FlatnessError {
    #[error("the prolonged system is not static feedback linearizable")]
    NotLinearizable,
    #[error("expected {expected} candidate outputs, found {found}")]
    CandidateCount { expected: usize, found: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Budgets and sampling settings of an analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub samples: usize,
    /// Cap on the σ recursion depth; defaults to `n + max_prolong`.
    pub max_k: Option<usize>,
    /// Lower cap on the σ search box; defaults to `2n`.
    pub max_prolong: Option<u32>,
    pub ansatz_degree: u32,
    /// Largest ambient dimension for the symbolic rank cross-check.
    pub cross_check_dim: usize,
    /// Analyse initializations in parallel.
    pub parallel: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            seed: 0,
            samples: 5,
            max_k: None,
            max_prolong: None,
            ansatz_degree: 2,
            cross_check_dim: 12,
            parallel: true,
        }
    }
}

impl AnalysisOptions {
    pub fn max_prolong_for(&self, sys: &SystemDef) -> u32 {
        self.max_prolong.unwrap_or(2 * sys.n() as u32).max(1)
    }

    pub fn max_k_for(&self, sys: &SystemDef) -> usize {
        self.max_k
            .unwrap_or(sys.n() + self.max_prolong_for(sys) as usize)
            .max(1)
    }

    pub fn context(&self, sys: &SystemDef) -> Arc<RankContext> {
        Arc::new(
            RankContext::new(Sampler::new(self.seed, self.samples))
                .with_base_point(sys.base_point_values())
                .with_cross_check_dim(self.cross_check_dim),
        )
    }
}

/// Prolonged systems of one base system, memoised by prolongation order.
pub struct Workspace {
    sys: Arc<SystemDef>,
    ctx: Arc<RankContext>,
    cache: Mutex<HashMap<MultiIndex, Arc<ProlongedSystem>>>,
}

impl Workspace {
    pub fn new(sys: Arc<SystemDef>, ctx: Arc<RankContext>) -> Self {
        Workspace {
            sys,
            ctx,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &Arc<SystemDef> {
        &self.sys
    }

    pub fn context(&self) -> &Arc<RankContext> {
        &self.ctx
    }

    pub fn get(&self, j: &MultiIndex) -> Arc<ProlongedSystem> {
        if let Some(ps) = self.cache.lock().expect("cache lock").get(j) {
            return ps.clone();
        }
        let ps = Arc::new(build_prolonged(self.sys.clone(), j.clone(), self.ctx.clone()));
        self.cache
            .lock()
            .expect("cache lock")
            .entry(j.clone())
            .or_insert(ps)
            .clone()
    }

    /// A fresh workspace sharing system and context but not the memo table.
    pub fn fork(&self) -> Workspace {
        Workspace::new(self.sys.clone(), self.ctx.clone())
    }
}
