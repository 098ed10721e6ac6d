//! The `.flt` system-definition format.
//!
//! ```text
//! system chained
//! state x1 x2
//! input u
//! param eps = 1/2
//! dot x1 = x2
//! dot x2 = u/eps
//! flatoutput x1
//! point x1 = 0
//! ```
//!
//! Drift equations may only use states, inputs (meaning their order-0
//! value) and parameters. Flat-output candidates may also use input
//! derivatives written with primes: `u'`, `u''`.

mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

use crate::expr::{Expr, Var, VarNamer};
use lexer::{lex_line, Spanned, Tok};
use parser::{ExprParser, Scope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}, column {col}: undeclared identifier `{name}`")]
    UndeclaredIdentifier {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("line {line}: second equation for state `{state}`")]
    DuplicateEquation { line: usize, state: String },
    #[error("no `dot` equation for state `{state}`")]
    MissingEquation { state: String },
    #[error("line {line}, column {col}: `{name}` is an input derivative; the drift may only depend on inputs")]
    HigherInputDerivativeInDrift {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("line {line}: name `{name}` is already declared or reserved")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}, column {col}: division by zero")]
    DivisionByZero { line: usize, col: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
}

impl ParseError {
    /// Line of the error, when it is tied to one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UndeclaredIdentifier { line, .. }
            | ParseError::DuplicateEquation { line, .. }
            | ParseError::HigherInputDerivativeInDrift { line, .. }
            | ParseError::DuplicateName { line, .. }
            | ParseError::DivisionByZero { line, .. } => Some(*line),
            ParseError::MissingEquation { .. } | ParseError::InvalidDimensions(_) => None,
        }
    }
}

/// A named symbolic constant, optionally with a nominal value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub value: Option<BigRational>,
}

/// A validated control system `ẋ = f(x, u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDef {
    pub name: String,
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub params: Vec<Param>,
    /// Drift components, in state order.
    pub f: Vec<Expr>,
    pub declared_flat_outputs: Option<Vec<Expr>>,
    /// Explicit base-point entries; everything else sits at 0.
    pub base_point: BTreeMap<Var, BigRational>,
}

const KEYWORDS: &[&str] = &[
    "system",
    "state",
    "input",
    "param",
    "dot",
    "flatoutput",
    "point",
    "sin",
    "cos",
];

impl SystemDef {
    pub fn n(&self) -> usize {
        self.state_names.len()
    }

    pub fn m(&self) -> usize {
        self.input_names.len()
    }

    /// Builds a system programmatically, checking the same invariants the
    /// parser enforces.
    pub fn new(
        name: &str,
        state_names: &[&str],
        input_names: &[&str],
        f: Vec<Expr>,
    ) -> Result<SystemDef, ParseError> {
        let sys = SystemDef {
            name: name.to_string(),
            state_names: state_names.iter().map(|s| s.to_string()).collect(),
            input_names: input_names.iter().map(|s| s.to_string()).collect(),
            params: Vec::new(),
            f,
            declared_flat_outputs: None,
            base_point: BTreeMap::new(),
        };
        sys.validate()?;
        Ok(sys)
    }

    fn validate(&self) -> Result<(), ParseError> {
        let (n, m) = (self.n(), self.m());
        if n == 0 {
            return Err(ParseError::InvalidDimensions("at least one state is required".into()));
        }
        if m == 0 {
            return Err(ParseError::InvalidDimensions("at least one input is required".into()));
        }
        if m > n {
            return Err(ParseError::InvalidDimensions(format!(
                "{m} inputs exceed {n} states"
            )));
        }
        if self.f.len() != n {
            return Err(ParseError::InvalidDimensions(format!(
                "{} drift components for {n} states",
                self.f.len()
            )));
        }
        for e in &self.f {
            for v in e.base_vars() {
                let ok = match v {
                    Var::State(i) => (i as usize) <= n && i >= 1,
                    Var::Input(i, 0) => (i as usize) <= m && i >= 1,
                    Var::Input(..) => false,
                    Var::Param(p) => (p as usize) < self.params.len(),
                    _ => false,
                };
                if !ok {
                    return Err(ParseError::InvalidDimensions(format!(
                        "drift uses variable {v} outside the declared universe"
                    )));
                }
            }
        }
        Ok(())
    }

    fn lookup_name(&self, name: &str) -> Option<Var> {
        if let Some(i) = self.state_names.iter().position(|s| s == name) {
            return Some(Var::State(i as u16 + 1));
        }
        if let Some(i) = self.input_names.iter().position(|s| s == name) {
            return Some(Var::Input(i as u16 + 1, 0));
        }
        if let Some(i) = self.params.iter().position(|p| p.name == name) {
            return Some(Var::Param(i as u16));
        }
        None
    }

    /// Parses an expression over this system's names; input derivatives
    /// are allowed.
    pub fn parse_expr(&self, text: &str) -> Result<Expr, ParseError> {
        let toks = lex_line(text).map_err(|col| ParseError::Syntax {
            line: 1,
            col,
            expected: "a valid character".into(),
            found: "an unexpected character".into(),
        })?;
        let scope = NameScope {
            sys: self,
            derivatives: true,
        };
        let mut p = ExprParser::new(&toks, 1, text.chars().count() + 1, &scope);
        let e = p.expr()?;
        if p.peek().is_some() {
            return Err(p.syntax("end of expression"));
        }
        Ok(e)
    }

    /// Explicit base-point values: `point` entries plus nominal parameter
    /// values. Everything unlisted is taken as 0 (parameters as 1).
    pub fn base_point_values(&self) -> BTreeMap<Var, BigRational> {
        let mut out = self.base_point.clone();
        for (i, p) in self.params.iter().enumerate() {
            if let Some(v) = &p.value {
                out.entry(Var::Param(i as u16)).or_insert_with(|| v.clone());
            }
        }
        out
    }
}

impl VarNamer for SystemDef {
    fn name(&self, v: Var) -> String {
        match v {
            Var::State(i) => self
                .state_names
                .get(i as usize - 1)
                .cloned()
                .unwrap_or_else(|| v.to_string()),
            Var::Input(i, k) => match self.input_names.get(i as usize - 1) {
                Some(n) => format!("{n}{}", "'".repeat(k as usize)),
                None => v.to_string(),
            },
            Var::Param(p) => self
                .params
                .get(p as usize)
                .map(|p| p.name.clone())
                .unwrap_or_else(|| v.to_string()),
            Var::Sin(b) => format!("sin({})", self.name(b.var())),
            Var::Cos(b) => format!("cos({})", self.name(b.var())),
        }
    }
}

struct NameScope<'a> {
    sys: &'a SystemDef,
    derivatives: bool,
}

impl Scope for NameScope<'_> {
    fn lookup(&self, name: &str) -> Option<Var> {
        self.sys.lookup_name(name)
    }
    fn allow_derivatives(&self) -> bool {
        self.derivatives
    }
}

fn syntax(line: usize, col: usize, expected: &str, found: Option<&Spanned>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        expected: expected.into(),
        found: found
            .map(|s| s.tok.describe())
            .unwrap_or_else(|| "end of line".into()),
    }
}

fn parse_rational(toks: &[Spanned], line: usize, end: usize) -> Result<BigRational, ParseError> {
    let mut i = 0;
    let neg = matches!(toks.first().map(|s| &s.tok), Some(Tok::Minus));
    if neg {
        i += 1;
    }
    let col_of = |i: usize| toks.get(i).map(|s| s.col).unwrap_or(end);
    let Some(Tok::Int(p)) = toks.get(i).map(|s| &s.tok) else {
        return Err(syntax(line, col_of(i), "a rational number", toks.get(i)));
    };
    i += 1;
    let mut q = BigInt::from(1);
    if let Some(Tok::Slash) = toks.get(i).map(|s| &s.tok) {
        i += 1;
        let Some(Tok::Int(d)) = toks.get(i).map(|s| &s.tok) else {
            return Err(syntax(line, col_of(i), "a denominator", toks.get(i)));
        };
        if d == &BigInt::from(0) {
            return Err(ParseError::DivisionByZero {
                line,
                col: col_of(i),
            });
        }
        q = d.clone();
        i += 1;
    }
    if i != toks.len() {
        return Err(syntax(line, col_of(i), "end of line", toks.get(i)));
    }
    let r = BigRational::new(p.clone(), q);
    Ok(if neg { -r } else { r })
}

/// Parses and validates a system file.
pub fn parse_system(text: &str) -> Result<SystemDef, ParseError> {
    let mut sys = SystemDef {
        name: String::new(),
        state_names: Vec::new(),
        input_names: Vec::new(),
        params: Vec::new(),
        f: Vec::new(),
        declared_flat_outputs: None,
        base_point: BTreeMap::new(),
    };
    let mut have_system = false;
    let mut have_state = false;
    let mut have_input = false;
    let mut eqs: Vec<Option<Expr>> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let end = content.chars().count() + 1;
        let toks = lex_line(content).map_err(|col| ParseError::Syntax {
            line,
            col,
            expected: "a valid character".into(),
            found: "an unexpected character".into(),
        })?;
        let Some(first) = toks.first() else { continue };
        let Tok::Ident(kw, 0) = &first.tok else {
            return Err(syntax(line, first.col, "a directive", Some(first)));
        };
        let rest = &toks[1..];
        let declare = |sys: &SystemDef, s: &Spanned| -> Result<String, ParseError> {
            let Tok::Ident(name, 0) = &s.tok else {
                return Err(syntax(line, s.col, "a name", Some(s)));
            };
            if KEYWORDS.contains(&name.as_str()) || sys.lookup_name(name).is_some() {
                return Err(ParseError::DuplicateName {
                    line,
                    name: name.clone(),
                });
            }
            Ok(name.clone())
        };
        let need_system = |have: bool| -> Result<(), ParseError> {
            if have {
                Ok(())
            } else {
                Err(syntax(line, first.col, "`system` as the first directive", Some(first)))
            }
        };
        match kw.as_str() {
            "system" => {
                if have_system {
                    return Err(syntax(line, first.col, "a single `system` line", Some(first)));
                }
                match rest {
                    [Spanned {
                        tok: Tok::Ident(name, 0),
                        ..
                    }] if !KEYWORDS.contains(&name.as_str()) => sys.name = name.clone(),
                    [s] => return Err(syntax(line, s.col, "a system name", Some(s))),
                    [] => return Err(syntax(line, end, "a system name", None)),
                    [_, s, ..] => return Err(syntax(line, s.col, "end of line", Some(s))),
                }
                have_system = true;
            }
            "state" | "input" => {
                need_system(have_system)?;
                let is_state = kw == "state";
                if (is_state && have_state) || (!is_state && have_input) {
                    return Err(syntax(line, first.col, "a single declaration line", Some(first)));
                }
                if !is_state && !have_state {
                    return Err(syntax(line, first.col, "`state` before `input`", Some(first)));
                }
                if rest.is_empty() {
                    return Err(syntax(line, end, "at least one name", None));
                }
                for s in rest {
                    let name = declare(&sys, s)?;
                    if is_state {
                        sys.state_names.push(name);
                    } else {
                        sys.input_names.push(name);
                    }
                }
                if is_state {
                    have_state = true;
                    eqs = vec![None; sys.state_names.len()];
                } else {
                    have_input = true;
                }
            }
            "param" => {
                need_system(have_system)?;
                let Some(s) = rest.first() else {
                    return Err(syntax(line, end, "a parameter name", None));
                };
                let name = declare(&sys, s)?;
                let value = match rest.get(1) {
                    None => None,
                    Some(Spanned { tok: Tok::Eq, .. }) => Some(parse_rational(&rest[2..], line, end)?),
                    Some(other) => return Err(syntax(line, other.col, "`=` or end of line", Some(other))),
                };
                sys.params.push(Param { name, value });
            }
            "dot" => {
                if !have_state || !have_input {
                    return Err(syntax(line, first.col, "`state` and `input` declarations first", Some(first)));
                }
                let Some(s) = rest.first() else {
                    return Err(syntax(line, end, "a state name", None));
                };
                let Tok::Ident(name, 0) = &s.tok else {
                    return Err(syntax(line, s.col, "a state name", Some(s)));
                };
                let Some(Var::State(i)) = sys.lookup_name(name) else {
                    return Err(ParseError::UndeclaredIdentifier {
                        line,
                        col: s.col,
                        name: name.clone(),
                    });
                };
                match rest.get(1) {
                    Some(Spanned { tok: Tok::Eq, .. }) => {}
                    other => return Err(syntax(line, other.map(|s| s.col).unwrap_or(end), "`=`", other)),
                }
                let scope = NameScope {
                    sys: &sys,
                    derivatives: false,
                };
                let body = &rest[2..];
                let mut p = ExprParser::new(body, line, end, &scope);
                let e = p.expr()?;
                if p.peek().is_some() {
                    return Err(p.syntax("an operator or end of line"));
                }
                let slot = &mut eqs[i as usize - 1];
                if slot.is_some() {
                    return Err(ParseError::DuplicateEquation {
                        line,
                        state: name.clone(),
                    });
                }
                *slot = Some(e);
            }
            "flatoutput" => {
                if !have_state || !have_input {
                    return Err(syntax(line, first.col, "`state` and `input` declarations first", Some(first)));
                }
                if sys.declared_flat_outputs.is_some() {
                    return Err(syntax(line, first.col, "a single `flatoutput` line", Some(first)));
                }
                let scope = NameScope {
                    sys: &sys,
                    derivatives: true,
                };
                let mut p = ExprParser::new(rest, line, end, &scope);
                let mut outs = vec![p.expr()?];
                while p.peek() == Some(&Tok::Comma) {
                    p.expect(Tok::Comma, "`,`")?;
                    outs.push(p.expr()?);
                }
                if p.peek().is_some() {
                    return Err(p.syntax("`,` or end of line"));
                }
                sys.declared_flat_outputs = Some(outs);
            }
            "point" => {
                if !have_state || !have_input {
                    return Err(syntax(line, first.col, "`state` and `input` declarations first", Some(first)));
                }
                let Some(s) = rest.first() else {
                    return Err(syntax(line, end, "a variable name", None));
                };
                let Tok::Ident(name, primes) = &s.tok else {
                    return Err(syntax(line, s.col, "a variable name", Some(s)));
                };
                let v = match (sys.lookup_name(name), *primes) {
                    (Some(Var::State(i)), 0) => Var::State(i),
                    (Some(Var::Input(i, 0)), k) => Var::Input(i, k),
                    (Some(Var::Param(_)), _) => {
                        return Err(syntax(line, s.col, "a state or input (parameters take `param p = value`)", Some(s)))
                    }
                    (Some(_), _) => return Err(syntax(line, s.col, "a state or input", Some(s))),
                    (None, _) => {
                        return Err(ParseError::UndeclaredIdentifier {
                            line,
                            col: s.col,
                            name: name.clone(),
                        })
                    }
                };
                match rest.get(1) {
                    Some(Spanned { tok: Tok::Eq, .. }) => {}
                    other => return Err(syntax(line, other.map(|s| s.col).unwrap_or(end), "`=`", other)),
                }
                let x = parse_rational(&rest[2..], line, end)?;
                if sys.base_point.insert(v, x).is_some() {
                    return Err(syntax(line, s.col, "each point entry once", Some(s)));
                }
            }
            _ => {
                return Err(syntax(
                    line,
                    first.col,
                    "one of system, state, input, param, dot, flatoutput, point",
                    Some(first),
                ))
            }
        }
    }

    if !have_system {
        return Err(syntax(last_line.max(1), 1, "a `system` line", None));
    }
    if !have_state {
        return Err(syntax(last_line.max(1), 1, "a `state` line", None));
    }
    if !have_input {
        return Err(syntax(last_line.max(1), 1, "an `input` line", None));
    }
    for (i, e) in eqs.into_iter().enumerate() {
        match e {
            Some(e) => sys.f.push(e),
            None => {
                return Err(ParseError::MissingEquation {
                    state: sys.state_names[i].clone(),
                })
            }
        }
    }
    if let Some(outs) = &sys.declared_flat_outputs {
        if outs.len() != sys.m() {
            return Err(ParseError::InvalidDimensions(format!(
                "{} flat-output candidates for {} inputs",
                outs.len(),
                sys.m()
            )));
        }
    }
    sys.validate()?;
    Ok(sys)
}

fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        let s = if r.is_negative() { "-" } else { "" };
        format!("{s}{}/{}", r.numer().abs(), r.denom())
    }
}

/// Renders a system back into the file format; `parse_system` of the
/// result reproduces an identical `SystemDef`.
pub fn render_system(sys: &SystemDef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system {}", sys.name);
    let _ = writeln!(out, "state {}", sys.state_names.join(" "));
    let _ = writeln!(out, "input {}", sys.input_names.join(" "));
    for p in &sys.params {
        match &p.value {
            Some(v) => {
                let _ = writeln!(out, "param {} = {}", p.name, render_rational(v));
            }
            None => {
                let _ = writeln!(out, "param {}", p.name);
            }
        }
    }
    for (name, e) in sys.state_names.iter().zip(&sys.f) {
        let _ = writeln!(out, "dot {name} = {}", e.render(sys));
    }
    if let Some(outs) = &sys.declared_flat_outputs {
        let parts: Vec<String> = outs.iter().map(|e| e.render(sys)).collect();
        let _ = writeln!(out, "flatoutput {}", parts.join(", "));
    }
    for (v, x) in &sys.base_point {
        let _ = writeln!(out, "point {} = {}", sys.name(*v), render_rational(x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAINED: &str = "\
system chained
state x11 x12 x13 x21 x22 x3
input u1 u2
dot x11 = x12
dot x12 = x13
dot x13 = u1
dot x21 = x22
dot x22 = u2
dot x3 = u1*u2
";

    #[test]
    fn parses_chained() {
        let s = parse_system(CHAINED).unwrap();
        assert_eq!((s.n(), s.m()), (6, 2));
        assert_eq!(s.f[5], Expr::input(1, 0).mul(&Expr::input(2, 0)));
    }

    #[test]
    fn missing_equation() {
        let t = "system s\nstate x1 x2\ninput u\ndot x1 = x2\n";
        assert_eq!(
            parse_system(t),
            Err(ParseError::MissingEquation { state: "x2".into() })
        );
    }

    #[test]
    fn duplicate_equation() {
        let t = "system s\nstate x1\ninput u\ndot x1 = u\ndot x1 = 2*u\n";
        assert!(matches!(
            parse_system(t),
            Err(ParseError::DuplicateEquation { line: 5, .. })
        ));
    }

    #[test]
    fn derivative_in_drift_is_rejected() {
        let t = "system s\nstate x1\ninput u\ndot x1 = u'\n";
        assert!(matches!(
            parse_system(t),
            Err(ParseError::HigherInputDerivativeInDrift { line: 4, col: 10, .. })
        ));
    }

    #[test]
    fn undeclared_identifier_reports_position() {
        let t = "system s\nstate x1\ninput u\ndot x1 = y + u\n";
        assert_eq!(
            parse_system(t),
            Err(ParseError::UndeclaredIdentifier {
                line: 4,
                col: 10,
                name: "y".into()
            })
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let t = "system s\nstate x1\ninput u\ndot x1 = (u + \n";
        match parse_system(t) {
            Err(ParseError::Syntax { line: 4, col, .. }) => assert_eq!(col, 15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn params_trig_and_points() {
        let t = "system p\nstate th w\ninput u\nparam eps = 1/2\ndot th = w\ndot w = sin(th)/eps - u*cos(th)\npoint w = -3/4\nflatoutput th + u'\n";
        let s = parse_system(t).unwrap();
        assert_eq!(s.params[0].value, Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(
            s.base_point.get(&Var::State(2)),
            Some(&BigRational::new((-3).into(), 4.into()))
        );
        let again = parse_system(&render_system(&s)).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(parse_system("").is_err());
        assert!(parse_system("# only a comment\n").is_err());
    }

    #[test]
    fn more_inputs_than_states_is_rejected() {
        let t = "system s\nstate x\ninput u v\ndot x = u + v\n";
        assert!(matches!(parse_system(t), Err(ParseError::InvalidDimensions(_))));
    }

    #[test]
    fn expression_strings_round_trip() {
        let s = parse_system(CHAINED).unwrap();
        let e = s.parse_expr("x3 - x22*u1 + x21*u1'").unwrap();
        assert_eq!(s.parse_expr(&e.render(&s)).unwrap(), e);
        let r = s.parse_expr("(x11^2 - 1)/(x11 - 1) + 1/(u1 + 2)").unwrap();
        assert_eq!(s.parse_expr(&r.render(&s)).unwrap(), r);
    }
}
