//! Bundled example systems.

use crate::sysdsl::{parse_system, SystemDef};

pub const CHAINED: &str = include_str!("../fixtures/chained.flt");
pub const DRIFTLESS: &str = include_str!("../fixtures/driftless.flt");
pub const CLM: &str = include_str!("../fixtures/clm.flt");
pub const PENDULUM: &str = include_str!("../fixtures/pendulum.flt");
pub const THREE_INPUT: &str = include_str!("../fixtures/three_input.flt");
pub const DOUBLE_INTEGRATOR: &str = include_str!("../fixtures/double_integrator.flt");
pub const UNCONTROLLABLE: &str = include_str!("../fixtures/uncontrollable.flt");

/// `(name, source)` for every bundled system.
pub const ALL: &[(&str, &str)] = &[
    ("chained", CHAINED),
    ("driftless", DRIFTLESS),
    ("clm", CLM),
    ("pendulum", PENDULUM),
    ("three_input", THREE_INPUT),
    ("double_integrator", DOUBLE_INTEGRATOR),
    ("uncontrollable", UNCONTROLLABLE),
];

/// Parses a bundled system; panics on the (tested) impossibility of a
/// malformed fixture.
pub fn load(src: &str) -> SystemDef {
    parse_system(src).expect("bundled fixture parses")
}
