//! Exact symbolic analysis of flatness by pure prolongation.

pub mod expr;
pub mod fixtures;
pub mod flatness;
pub mod jetgeom;
pub mod prolong;
pub mod sysdsl;
