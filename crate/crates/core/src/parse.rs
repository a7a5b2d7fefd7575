//! Text grammar for formulas and sequents.
//!
//! ```text
//! imp  := or ("->" imp)?          right-associative
//! or   := and ("|" and)*          left-associative (full language only)
//! and  := prim ("&" prim)*        left-associative (full language only)
//! prim := ident | "false" | "(" imp ")"
//! ```
//!
//! Identifiers are nonempty runs of `[A-Za-z0-9_.]`.

use thiserror::Error;

use crate::formula::{is_ident_char, Formula, Sequent, Var};
use crate::full::FullFormula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Arrow,
    And,
    Or,
    LParen,
    RParen,
    Comma,
    Turnstile,
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Arrow => "`->`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Turnstile => "`=>`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok<'_>)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'&' => {
                out.push((i, Tok::And));
                i += 1;
            }
            b'|' => {
                out.push((i, Tok::Or));
                i += 1;
            }
            b',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((i, Tok::Arrow));
                i += 2;
            }
            b'=' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((i, Tok::Turnstile));
                i += 2;
            }
            _ if is_ident_char(c as char) => {
                let start = i;
                while i < bytes.len() && is_ident_char(bytes[i] as char) {
                    i += 1;
                }
                out.push((start, Tok::Ident(&text[start..i])));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(i, format!("unexpected character {ch:?}")));
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    full: bool,
}

/// Parsed term, generic over the two languages.
trait Term: Sized {
    fn atom(name: &str) -> Self;
    fn falsum(offset: usize) -> Result<Self, ParseError>;
    fn imp(a: Self, b: Self) -> Self;
    fn and(a: Self, b: Self) -> Self;
    fn or(a: Self, b: Self) -> Self;
}

impl Term for Formula {
    fn atom(name: &str) -> Self {
        Formula::var(name)
    }
    fn falsum(_: usize) -> Result<Self, ParseError> {
        Ok(Formula::var("false"))
    }
    fn imp(a: Self, b: Self) -> Self {
        Formula::imp(a, b)
    }
    fn and(_: Self, _: Self) -> Self {
        unreachable!("conjunction is rejected by the implicational parser")
    }
    fn or(_: Self, _: Self) -> Self {
        unreachable!("disjunction is rejected by the implicational parser")
    }
}

impl Term for FullFormula {
    fn atom(name: &str) -> Self {
        FullFormula::Atom(Var::new(name))
    }
    fn falsum(_: usize) -> Result<Self, ParseError> {
        Ok(FullFormula::Falsum)
    }
    fn imp(a: Self, b: Self) -> Self {
        FullFormula::imp(a, b)
    }
    fn and(a: Self, b: Self) -> Self {
        FullFormula::and(a, b)
    }
    fn or(a: Self, b: Self) -> Self {
        FullFormula::or(a, b)
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, full: bool) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, full })
    }

    fn peek(&self) -> (usize, Tok<'a>) {
        self.toks[self.pos]
    }

    fn bump(&mut self) -> (usize, Tok<'a>) {
        let t = self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (off, tok) = self.peek();
        Err(ParseError::new(off, format!("expected {expected}, found {}", tok.describe())))
    }

    fn imp<T: Term>(&mut self) -> Result<T, ParseError> {
        // Collect operands iteratively, then fold to the right.
        let mut parts = vec![self.or::<T>()?];
        while self.peek().1 == Tok::Arrow {
            self.bump();
            parts.push(self.or::<T>()?);
        }
        let mut acc = parts.pop().expect("at least one operand");
        while let Some(a) = parts.pop() {
            acc = T::imp(a, acc);
        }
        Ok(acc)
    }

    fn or<T: Term>(&mut self) -> Result<T, ParseError> {
        let mut acc = self.and::<T>()?;
        while self.full && self.peek().1 == Tok::Or {
            self.bump();
            acc = T::or(acc, self.and::<T>()?);
        }
        Ok(acc)
    }

    fn and<T: Term>(&mut self) -> Result<T, ParseError> {
        let mut acc = self.prim::<T>()?;
        while self.full && self.peek().1 == Tok::And {
            self.bump();
            acc = T::and(acc, self.prim::<T>()?);
        }
        Ok(acc)
    }

    fn prim<T: Term>(&mut self) -> Result<T, ParseError> {
        match self.peek() {
            (off, Tok::Ident("false")) if self.full => {
                self.bump();
                T::falsum(off)
            }
            (_, Tok::Ident(name)) => {
                self.bump();
                Ok(T::atom(name))
            }
            (_, Tok::LParen) => {
                self.bump();
                let inner = self.imp::<T>()?;
                if self.peek().1 != Tok::RParen {
                    return self.unexpected("`)`");
                }
                self.bump();
                Ok(inner)
            }
            _ => self.unexpected("a formula"),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek().1 {
            Tok::End => Ok(()),
            _ => self.unexpected("end of input"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, false)?;
    let f = p.imp::<Formula>()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_full(text: &str) -> Result<FullFormula, ParseError> {
    let mut p = Parser::new(text, true)?;
    let f = p.imp::<FullFormula>()?;
    p.finish()?;
    Ok(f)
}

/// `a, b->c => d`; the antecedent may be empty (`=> d`).
pub fn parse_sequent(text: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text, false)?;
    let mut ant = Vec::new();
    if p.peek().1 != Tok::Turnstile {
        loop {
            ant.push(p.imp::<Formula>()?);
            match p.peek().1 {
                Tok::Comma => {
                    p.bump();
                }
                Tok::Turnstile => break,
                _ => return p.unexpected("`,` or `=>`"),
            }
        }
    }
    p.bump();
    let succ = p.imp::<Formula>()?;
    p.finish()?;
    Ok(Sequent::new(ant, succ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_precedence() {
        let f = parse_full("a & b | c -> d").unwrap();
        assert_eq!(f.to_string(), "a&b|c->d");
        assert_eq!(parse_full("(a->b)|c").unwrap().to_string(), "(a->b)|c");
        assert_eq!(parse_full("a&(b|c)").unwrap().to_string(), "a&(b|c)");
        let g = parse_full("a | b | c").unwrap();
        assert_eq!(g, FullFormula::or(FullFormula::or(parse_full("a").unwrap(), parse_full("b").unwrap()), parse_full("c").unwrap()));
        assert_eq!(parse_full("false").unwrap(), FullFormula::Falsum);
        assert_eq!(parse_full("a->false").unwrap().to_string(), "a->false");
    }

    #[test]
    fn implicational_rejects_connectives() {
        assert!(parse_formula("a & b").is_err());
        assert!(parse_formula("a $ b").is_err());
    }

    #[test]
    fn sequent_errors() {
        assert!(parse_sequent("a, => b").is_err());
        assert!(parse_sequent("a b => c").is_err());
        assert!(parse_sequent("a => ").is_err());
    }
}
