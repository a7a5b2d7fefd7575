//! Purely implicational formulas, hash-consed into a process-wide table.
//!
//! A [`Formula`] is a dense integer handle. Two formulas are structurally
//! equal iff their handles are equal, so comparisons and hashing are O(1).
//! The table is guarded by a read/write lock and may be shared by worker
//! threads; handles are `Copy + Send + Sync`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use crate::parse::{self, ParseError};

/// A propositional variable. Ordering is by name.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(u32);

/// A hash-consed purely implicational formula.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula(u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Shape {
    Atom(Var),
    Imp(Formula, Formula),
}

#[derive(Default)]
struct Table {
    shapes: Vec<Shape>,
    weights: Vec<u64>,
    index: HashMap<Shape, u32>,
    names: Vec<Arc<str>>,
    name_index: HashMap<Arc<str>, u32>,
}

static TABLE: LazyLock<RwLock<Table>> = LazyLock::new(|| RwLock::new(Table::default()));

fn read() -> std::sync::RwLockReadGuard<'static, Table> {
    TABLE.read().unwrap_or_else(|e| e.into_inner())
}

fn write() -> std::sync::RwLockWriteGuard<'static, Table> {
    TABLE.write().unwrap_or_else(|e| e.into_inner())
}

/// Characters allowed in variable names.
pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

impl Var {
    /// Interns a variable name. Panics on an empty or malformed name; use
    /// [`Var::try_new`] for untrusted input.
    pub fn new(name: &str) -> Var {
        Var::try_new(name).unwrap_or_else(|| panic!("invalid variable name {name:?}"))
    }

    pub fn try_new(name: &str) -> Option<Var> {
        if name.is_empty() || !name.chars().all(is_ident_char) {
            return None;
        }
        if let Some(&id) = read().name_index.get(name) {
            return Some(Var(id));
        }
        let mut t = write();
        if let Some(&id) = t.name_index.get(name) {
            return Some(Var(id));
        }
        let id = t.names.len() as u32;
        let name: Arc<str> = Arc::from(name);
        t.names.push(name.clone());
        t.name_index.insert(name, id);
        Some(Var(id))
    }

    pub fn name(self) -> Arc<str> {
        read().names[self.0 as usize].clone()
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.0 == other.0 {
            return std::cmp::Ordering::Equal;
        }
        let t = read();
        t.names[self.0 as usize].cmp(&t.names[other.0 as usize])
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Formula {
    fn intern(shape: Shape) -> Formula {
        if let Some(&id) = read().index.get(&shape) {
            return Formula(id);
        }
        let mut t = write();
        if let Some(&id) = t.index.get(&shape) {
            return Formula(id);
        }
        let weight = match shape {
            Shape::Atom(_) => 1,
            Shape::Imp(a, b) => 1 + t.weights[a.0 as usize] + t.weights[b.0 as usize],
        };
        let id = t.shapes.len() as u32;
        t.shapes.push(shape);
        t.weights.push(weight);
        t.index.insert(shape, id);
        Formula(id)
    }

    pub fn atom(v: Var) -> Formula {
        Formula::intern(Shape::Atom(v))
    }

    /// Atom by name; panics on a malformed name.
    pub fn var(name: &str) -> Formula {
        Formula::atom(Var::new(name))
    }

    pub fn imp(antecedent: Formula, consequent: Formula) -> Formula {
        Formula::intern(Shape::Imp(antecedent, consequent))
    }

    /// `hyps[0] -> (hyps[1] -> ... -> concl)`.
    pub fn chain(hyps: &[Formula], concl: Formula) -> Formula {
        hyps.iter().rev().fold(concl, |acc, &h| Formula::imp(h, acc))
    }

    pub fn parse(text: &str) -> Result<Formula, ParseError> {
        parse::parse_formula(text)
    }

    /// Dense interning key.
    pub fn id(self) -> u32 {
        self.0
    }

    pub fn shape(self) -> Shape {
        read().shapes[self.0 as usize]
    }

    pub fn is_atom(self) -> bool {
        matches!(self.shape(), Shape::Atom(_))
    }

    pub fn as_atom(self) -> Option<Var> {
        match self.shape() {
            Shape::Atom(v) => Some(v),
            Shape::Imp(..) => None,
        }
    }

    pub fn as_imp(self) -> Option<(Formula, Formula)> {
        match self.shape() {
            Shape::Atom(_) => None,
            Shape::Imp(a, b) => Some((a, b)),
        }
    }

    /// Number of atom occurrences plus number of implications.
    pub fn weight(self) -> u64 {
        read().weights[self.0 as usize]
    }

    /// All subterms, including the formula itself.
    pub fn subformulas(self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(g) = stack.pop() {
            if out.insert(g) {
                if let Some((a, b)) = g.as_imp() {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        out
    }

    pub fn vars(self) -> BTreeSet<Var> {
        self.subformulas().into_iter().filter_map(Formula::as_atom).collect()
    }

    /// Whether `v` occurs anywhere in the formula.
    pub fn mentions(self, v: Var) -> bool {
        let mut stack = vec![self];
        while let Some(g) = stack.pop() {
            match g.shape() {
                Shape::Atom(w) if w == v => return true,
                Shape::Atom(_) => {}
                Shape::Imp(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        false
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Walk the right spine iteratively; long hypothesis chains are common.
        let mut cur = *self;
        loop {
            match cur.shape() {
                Shape::Atom(v) => return f.write_str(&v.name()),
                Shape::Imp(a, b) => {
                    if a.is_atom() {
                        write!(f, "{a}->")?;
                    } else {
                        write!(f, "({a})->")?;
                    }
                    cur = b;
                }
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::parse(s)
    }
}

impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Formula::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A sequent `Γ ⇒ α` with a multiset antecedent kept sorted by formula id.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    antecedent: Vec<Formula>,
    pub succedent: Formula,
}

impl Sequent {
    pub fn new(mut antecedent: Vec<Formula>, succedent: Formula) -> Sequent {
        antecedent.sort_unstable();
        Sequent { antecedent, succedent }
    }

    pub fn goal(succedent: Formula) -> Sequent {
        Sequent { antecedent: Vec::new(), succedent }
    }

    pub fn parse(text: &str) -> Result<Sequent, ParseError> {
        parse::parse_sequent(text)
    }

    pub fn antecedent(&self) -> &[Formula] {
        &self.antecedent
    }

    pub fn contains(&self, f: Formula) -> bool {
        self.antecedent.binary_search(&f).is_ok()
    }

    /// Copy with one occurrence of each of `remove` taken out and `add`
    /// inserted. Returns `None` if some formula to remove is absent.
    pub fn edit(&self, remove: &[Formula], add: &[Formula], succedent: Formula) -> Option<Sequent> {
        let mut ant = self.antecedent.clone();
        for r in remove {
            let pos = ant.binary_search(r).ok()?;
            ant.remove(pos);
        }
        for &a in add {
            let pos = ant.binary_search(&a).unwrap_or_else(|p| p);
            ant.insert(pos, a);
        }
        Some(Sequent { antecedent: ant, succedent })
    }

    /// Sum of antecedent weights, plus the succedent, plus one.
    pub fn weight(&self) -> u64 {
        self.antecedent.iter().map(|f| f.weight()).sum::<u64>() + self.succedent.weight() + 1
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.antecedent.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        if self.antecedent.is_empty() {
            write!(f, "=> {}", self.succedent)
        } else {
            write!(f, " => {}", self.succedent)
        }
    }
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Sequent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Sequent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Sequent::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn right_associative() {
        let p = Formula::var("p");
        let q = Formula::var("q");
        assert_eq!(f("p->q->p"), Formula::imp(p, Formula::imp(q, p)));
        assert_eq!(f("(p->q)->p"), Formula::imp(Formula::imp(p, q), p));
        assert_eq!(f("p->q->p").to_string(), "p->q->p");
        assert_eq!(f("((p->q))->p").to_string(), "(p->q)->p");
    }

    #[test]
    fn truncated_input_reports_offset() {
        let err = Formula::parse("p->").unwrap_err();
        assert_eq!(err.offset, 3);
        assert!(Formula::parse("p q").is_err());
        assert!(Formula::parse("(p->q").is_err());
        assert!(Formula::parse("").is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(f("p").weight(), 1);
        assert_eq!(f("p->q").weight(), 3);
        assert_eq!(f("p->(q->p)").weight(), 5);
    }

    #[test]
    fn subformula_sets() {
        assert_eq!(f("p").subformulas().len(), 1);
        let s = f("p->q").subformulas();
        assert_eq!(s, [f("p"), f("q"), f("p->q")].into_iter().collect());
        assert_eq!(f("p->p").subformulas().len(), 2);
    }

    #[test]
    fn interning_is_stable() {
        assert_eq!(f("a1->b_2").id(), f("a1 -> b_2").id());
        assert_ne!(f("a1->b_2"), f("b_2->a1"));
    }

    #[test]
    fn sequents() {
        let s = Sequent::parse("a->b, (a->b)->c => a->b").unwrap();
        assert_eq!(s.antecedent().len(), 2);
        assert_eq!(s.succedent, f("a->b"));
        assert_eq!(Sequent::parse(&s.to_string()).unwrap(), s);
        let g = Sequent::parse("=> p->p").unwrap();
        assert!(g.antecedent().is_empty());
        assert_eq!(g.weight(), 4);
        let e = s.edit(&[f("a->b")], &[f("a"), f("a")], f("b")).unwrap();
        assert_eq!(e.antecedent().len(), 3);
        assert!(s.edit(&[f("zz")], &[], f("b")).is_none());
    }

    #[test]
    fn var_order_is_by_name() {
        let b = Var::new("bbb_order");
        let a = Var::new("aaa_order");
        assert!(a < b);
    }
}
