use std::fmt;

/// A variable that may sit under `sin`/`cos`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    State(u16),
    Input(u16, u16),
    Param(u16),
}

/// One coordinate of the variable universe.
///
/// `State(i)` and `Input(i, k)` are 1-based; `Input(i, k)` is the k-th time
/// derivative of the i-th input. Parameters are indexed from 0 in declaration
/// order. The derived ordering (state < input < param < trig atoms) is the
/// variable order used by the monomial ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    State(u16),
    Input(u16, u16),
    Param(u16),
    Sin(Base),
    Cos(Base),
}

impl Base {
    pub fn var(self) -> Var {
        match self {
            Base::State(i) => Var::State(i),
            Base::Input(i, k) => Var::Input(i, k),
            Base::Param(p) => Var::Param(p),
        }
    }
}

impl Var {
    /// The underlying base variable, `None` for trig atoms.
    pub fn as_base(self) -> Option<Base> {
        match self {
            Var::State(i) => Some(Base::State(i)),
            Var::Input(i, k) => Some(Base::Input(i, k)),
            Var::Param(p) => Some(Base::Param(p)),
            Var::Sin(_) | Var::Cos(_) => None,
        }
    }

    pub fn is_trig(self) -> bool {
        matches!(self, Var::Sin(_) | Var::Cos(_))
    }

    pub fn is_sin(self) -> bool {
        matches!(self, Var::Sin(_))
    }

    /// Base of a trig atom.
    pub fn trig_base(self) -> Option<Base> {
        match self {
            Var::Sin(b) | Var::Cos(b) => Some(b),
            _ => None,
        }
    }

    /// Stable integer key, used to derive sample values independent of
    /// whichever other variables happen to be present.
    pub fn key(self) -> u64 {
        fn base_key(b: Base) -> u64 {
            match b {
                Base::State(i) => 1 << 40 | i as u64,
                Base::Input(i, k) => 2 << 40 | (i as u64) << 16 | k as u64,
                Base::Param(p) => 3 << 40 | p as u64,
            }
        }
        match self {
            Var::Sin(b) => 4 << 44 | base_key(b),
            Var::Cos(b) => 5 << 44 | base_key(b),
            v => base_key(v.as_base().unwrap()),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::State(i) => write!(f, "x{i}"),
            Var::Input(i, k) => write!(f, "u{i}{}", "'".repeat(*k as usize)),
            Var::Param(p) => write!(f, "p{p}"),
            Var::Sin(b) => write!(f, "sin({})", b.var()),
            Var::Cos(b) => write!(f, "cos({})", b.var()),
        }
    }
}

/// Maps variables to display names.
pub trait VarNamer {
    fn name(&self, v: Var) -> String;
}

/// Fallback namer: `x1`, `u1'`, `p0`, `sin(x1)`.
pub struct DefaultNamer;

impl VarNamer for DefaultNamer {
    fn name(&self, v: Var) -> String {
        v.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_trig_last() {
        let mut vs = vec![
            Var::Cos(Base::State(1)),
            Var::Param(0),
            Var::Input(1, 2),
            Var::Sin(Base::State(1)),
            Var::Input(1, 0),
            Var::State(3),
        ];
        vs.sort();
        assert_eq!(
            vs,
            vec![
                Var::State(3),
                Var::Input(1, 0),
                Var::Input(1, 2),
                Var::Param(0),
                Var::Sin(Base::State(1)),
                Var::Cos(Base::State(1)),
            ]
        );
    }

    #[test]
    fn keys_are_distinct() {
        let vs = [
            Var::State(1),
            Var::Input(1, 0),
            Var::Input(1, 1),
            Var::Param(1),
            Var::Sin(Base::State(1)),
            Var::Cos(Base::State(1)),
        ];
        let keys: std::collections::BTreeSet<_> = vs.iter().map(|v| v.key()).collect();
        assert_eq!(keys.len(), vs.len());
    }
}
