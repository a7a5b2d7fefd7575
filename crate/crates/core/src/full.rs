//! Full propositional language: `⊥`, `∧`, `∨`, `→`.

use std::collections::BTreeSet;
use std::fmt;

use crate::formula::Var;
use crate::parse::{self, ParseError};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FullFormula {
    Atom(Var),
    Falsum,
    And(Box<FullFormula>, Box<FullFormula>),
    Or(Box<FullFormula>, Box<FullFormula>),
    Imp(Box<FullFormula>, Box<FullFormula>),
}

impl FullFormula {
    pub fn var(name: &str) -> FullFormula {
        FullFormula::Atom(Var::new(name))
    }

    pub fn and(a: FullFormula, b: FullFormula) -> FullFormula {
        FullFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FullFormula, b: FullFormula) -> FullFormula {
        FullFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: FullFormula, b: FullFormula) -> FullFormula {
        FullFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn negation(a: FullFormula) -> FullFormula {
        FullFormula::imp(a, FullFormula::Falsum)
    }

    /// Left-associated conjunction; `None` for an empty list.
    pub fn conj(items: impl IntoIterator<Item = FullFormula>) -> Option<FullFormula> {
        items.into_iter().reduce(FullFormula::and)
    }

    /// Left-associated disjunction; `None` for an empty list.
    pub fn disj(items: impl IntoIterator<Item = FullFormula>) -> Option<FullFormula> {
        items.into_iter().reduce(FullFormula::or)
    }

    pub fn parse(text: &str) -> Result<FullFormula, ParseError> {
        parse::parse_full(text)
    }

    /// Symbol count: atoms, `⊥` and connectives each count one.
    pub fn size(&self) -> u64 {
        match self {
            FullFormula::Atom(_) | FullFormula::Falsum => 1,
            FullFormula::And(a, b) | FullFormula::Or(a, b) | FullFormula::Imp(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            FullFormula::Atom(v) => {
                out.insert(*v);
            }
            FullFormula::Falsum => {}
            FullFormula::And(a, b) | FullFormula::Or(a, b) | FullFormula::Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Classical truth value under `val`.
    pub fn eval(&self, val: &impl Fn(Var) -> bool) -> bool {
        match self {
            FullFormula::Atom(v) => val(*v),
            FullFormula::Falsum => false,
            FullFormula::And(a, b) => a.eval(val) && b.eval(val),
            FullFormula::Or(a, b) => a.eval(val) || b.eval(val),
            FullFormula::Imp(a, b) => !a.eval(val) || b.eval(val),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            FullFormula::Imp(..) => 0,
            FullFormula::Or(..) => 1,
            FullFormula::And(..) => 2,
            FullFormula::Atom(_) | FullFormula::Falsum => 3,
        }
    }
}

fn child(f: &mut fmt::Formatter<'_>, c: &FullFormula, min: u8) -> fmt::Result {
    if c.prec() < min {
        write!(f, "({c})")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for FullFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FullFormula::Atom(v) => write!(f, "{v}"),
            FullFormula::Falsum => f.write_str("false"),
            FullFormula::Imp(a, b) => {
                child(f, a, 1)?;
                f.write_str("->")?;
                child(f, b, 0)
            }
            FullFormula::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str("|")?;
                child(f, b, 2)
            }
            FullFormula::And(a, b) => {
                child(f, a, 2)?;
                f.write_str("&")?;
                child(f, b, 3)
            }
        }
    }
}

impl serde::Serialize for FullFormula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for FullFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
