use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::lexer::{Spanned, Tok};
use super::ParseError;
use crate::expr::{Expr, Var};

const MAX_POWER: u32 = 64;

/// How identifiers are resolved while parsing an expression.
pub trait Scope {
    /// Resolves a plain identifier (without primes).
    fn lookup(&self, name: &str) -> Option<Var>;
    /// Whether `u'`, `u''`, … may appear.
    fn allow_derivatives(&self) -> bool;
}

pub struct ExprParser<'a, S: Scope> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
    scope: &'a S,
}

impl<'a, S: Scope> ExprParser<'a, S> {
    pub fn new(toks: &'a [Spanned], line: usize, end_col: usize, scope: &'a S) -> Self {
        ExprParser {
            toks,
            pos: 0,
            line,
            end_col,
            scope,
        }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    pub fn col(&self) -> usize {
        self.toks.get(self.pos).map(|s| s.col).unwrap_or(self.end_col)
    }

    pub fn syntax(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col(),
            expected: expected.to_string(),
            found: self
                .peek()
                .map(|t| t.describe())
                .unwrap_or_else(|| "end of line".into()),
        }
    }

    pub fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(what))
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    let col = self.col();
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc.div(&d).map_err(|_| ParseError::DivisionByZero {
                        line: self.line,
                        col,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        match self.peek() {
            Some(Tok::Int(k)) => {
                let e = k.to_u32().filter(|&e| e <= MAX_POWER);
                let Some(e) = e else {
                    return Err(self.syntax(&format!("an exponent of at most {MAX_POWER}")));
                };
                self.pos += 1;
                Ok(base.pow(e))
            }
            _ => Err(self.syntax("a nonnegative integer exponent")),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(i)) => {
                self.pos += 1;
                Ok(Expr::rational(BigRational::from_integer(i)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name, primes)) if (name == "sin" || name == "cos") && primes == 0 => {
                self.pos += 1;
                self.expect(Tok::LParen, "`(` after trig function")?;
                let arg_col = self.col();
                let arg = match self.peek().cloned() {
                    Some(Tok::Ident(a, p)) => {
                        self.pos += 1;
                        self.resolve(&a, p, arg_col)?
                    }
                    _ => return Err(self.syntax("a variable as trig argument")),
                };
                self.expect(Tok::RParen, "`)`")?;
                let b = arg.as_base().expect("resolved variables are not trig atoms");
                Ok(if name == "sin" { Expr::sin(b) } else { Expr::cos(b) })
            }
            Some(Tok::Ident(name, primes)) => {
                self.pos += 1;
                Ok(Expr::var(self.resolve(&name, primes, col)?))
            }
            _ => Err(self.syntax("a number, variable, `sin(`, `cos(` or `(`")),
        }
    }

    fn resolve(&self, name: &str, primes: u16, col: usize) -> Result<Var, ParseError> {
        let v = self
            .scope
            .lookup(name)
            .ok_or_else(|| ParseError::UndeclaredIdentifier {
                line: self.line,
                col,
                name: name.to_string(),
            })?;
        if primes == 0 {
            return Ok(v);
        }
        match v {
            Var::Input(i, 0) if self.scope.allow_derivatives() => Ok(Var::Input(i, primes)),
            Var::Input(_, _) => Err(ParseError::HigherInputDerivativeInDrift {
                line: self.line,
                col,
                name: format!("{name}{}", "'".repeat(primes as usize)),
            }),
            _ => Err(ParseError::Syntax {
                line: self.line,
                col,
                expected: "primes only on input names".into(),
                found: format!("`{name}'`"),
            }),
        }
    }
}
