//! Vector fields on prolonged jet spaces, Lie brackets and distributions.

mod context;
mod distribution;
mod field;
mod linalg;
mod multiindex;
mod sample;
mod space;

pub use context::{CrossCheckStats, RankContext};
pub use distribution::{split_factor, Distribution, RankCertificate, SampleRank, SingularFactor};
pub use field::VectorField;
pub use linalg::{bareiss_rank, BareissOutcome, Rref};
pub use multiindex::MultiIndex;
pub use sample::Sampler;
pub use space::JetSpace;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("vector fields live on different jet spaces")]
    SpaceMismatch,
    #[error("could not find enough sample points avoiding vanishing denominators")]
    SamplingExhausted,
    #[error("involutive closure did not reach a fixpoint within the round budget")]
    IterationBudgetExceeded,
}
