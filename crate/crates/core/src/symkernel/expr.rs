//! Text grammar for rational expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Rational literals such as `3/2` are ordinary divisions. Exponents are
//! nonnegative integers; `-x^2` means `-(x^2)`.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::symkernel::poly::Var;
use crate::{RationalExpr, Q};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        let column = src[..pos].chars().count() + 1;
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
            let n = BigInt::from_str(&text).map_err(|e| Error::Parse {
                column,
                message: e.to_string(),
            })?;
            out.push((column, Tok::Int(n)));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((column, Tok::Ident(chars[start..i].iter().map(|(_, c)| c).collect())));
        } else if "+-*/^()".contains(ch) {
            out.push((column, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(Error::Parse {
                column,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_column: usize,
    allowed: Option<&'a BTreeSet<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |(c, _)| *c)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            column: self.column(),
            message: message.into(),
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RationalExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RationalExpr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let rhs = self.unary()?;
                acc = acc.checked_div(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalExpr> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<RationalExpr> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e: u32 = u32::try_from(&n).map_err(|_| self.error("exponent too large"))?;
                    base.pow(e as i32)
                }
                _ => Err(self.error("expected a nonnegative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<RationalExpr> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(RationalExpr::constant(Q::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                if let Some(allowed) = self.allowed {
                    if !allowed.contains(&name) {
                        return Err(Error::UndeclaredCoordinate(name));
                    }
                }
                self.pos += 1;
                Ok(RationalExpr::var(&Var::from(name.as_str())))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(t) => Err(self.error(format!("unexpected token {t:?}"))),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

fn parse_impl(src: &str, allowed: Option<&BTreeSet<String>>) -> Result<RationalExpr> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_column: src.chars().count() + 1,
        allowed,
    };
    if p.peek().is_none() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

/// Parse an expression; any identifier is accepted as a variable.
pub fn parse_expr(src: &str) -> Result<RationalExpr> {
    parse_impl(src, None)
}

/// Parse an expression whose identifiers must belong to `coords`.
pub fn parse_expr_in(src: &str, coords: &BTreeSet<String>) -> Result<RationalExpr> {
    parse_impl(src, Some(coords))
}

impl FromStr for RationalExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

/// `1` as an expression; handy in tests and catalogs.
pub fn one() -> RationalExpr {
    RationalExpr::one()
}

/// `0` as an expression.
pub fn zero() -> RationalExpr {
    RationalExpr::zero()
}
