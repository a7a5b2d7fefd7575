//! Hamiltonian-path encoding of digraphs, brute-force oracles, and the
//! translation of full propositional formulas into implicational ones.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{Formula, Var};
use crate::full::FullFormula;

/// Simple digraph on vertices `0..n`, named `v1..vn` unless given names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiGraph {
    names: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl DiGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<DiGraph> {
        let names = (1..=n).map(|i| format!("v{i}")).collect();
        DiGraph::with_names(names, edges)
    }

    pub fn with_names(names: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<DiGraph> {
        if names.is_empty() {
            return Err(Error::Invalid("a graph needs at least one vertex".into()));
        }
        if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
            return Err(Error::Invalid("vertex names must be unique".into()));
        }
        let n = names.len();
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!("edge ({u},{v}) out of range")));
            }
            if !set.insert((u, v)) {
                return Err(Error::Invalid(format!("duplicate edge {} {}", names[u], names[v])));
            }
        }
        Ok(DiGraph { names, edges: set })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    /// The graph on `n` vertices whose edge set is encoded by the bits of
    /// `mask` over ordered pairs `(u, v)` with `u ≠ v`, row-major.
    pub fn from_mask(n: usize, mask: u64) -> DiGraph {
        let pairs = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)));
        let edges: Vec<_> = pairs.enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, e)| e).collect();
        DiGraph::new(n, edges).expect("mask edges are distinct")
    }
}

impl fmt::Display for DiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n())?;
        for &(u, v) in &self.edges {
            writeln!(f, "{} {}", self.names[u], self.names[v])?;
        }
        Ok(())
    }
}

/// `n <count>` header, then one `u v` directed edge per line; vertices are
/// `v1..vn`. Blank lines and `#` comments are ignored.
pub fn parse_graph(text: &str) -> Result<DiGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| Error::Invalid("empty graph file".into()))?;
    let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["n", k] => k.parse::<usize>().map_err(|_| Error::Invalid(format!("line {ln}: bad vertex count {k:?}")))?,
        _ => return Err(Error::Invalid(format!("line {ln}: expected `n <count>`"))),
    };
    if n == 0 {
        return Err(Error::Invalid(format!("line {ln}: a graph needs at least one vertex")));
    }
    let vertex = |ln: usize, s: &str| -> Result<usize> {
        s.strip_prefix('v')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| (1..=n).contains(&k) && s == format!("v{k}"))
            .map(|k| k - 1)
            .ok_or_else(|| Error::Invalid(format!("line {ln}: unknown vertex {s:?}")))
    };
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    for (ln, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let [u, v] = parts[..] else {
            return Err(Error::Invalid(format!("line {ln}: expected `u v`")));
        };
        let e = (vertex(ln, u)?, vertex(ln, v)?);
        if !seen.insert(e) {
            return Err(Error::Invalid(format!("line {ln}: duplicate edge {u} {v}")));
        }
        edges.push(e);
    }
    DiGraph::new(n, edges)
}

/// Largest graph the permutation oracle accepts.
pub const ORACLE_MAX_N: usize = 10;

/// Whether some ordering of all vertices has every consecutive pair joined
/// by an edge.
pub fn hamiltonicity_oracle(g: &DiGraph) -> Result<bool> {
    let n = g.n();
    if n > ORACLE_MAX_N {
        return Err(Error::Limit(format!("oracle supports at most {ORACLE_MAX_N} vertices, got {n}")));
    }
    fn extend(g: &DiGraph, last: usize, used: u32, count: usize) -> bool {
        if count == g.n() {
            return true;
        }
        (0..g.n()).any(|v| used >> v & 1 == 0 && g.has_edge(last, v) && extend(g, v, used | 1 << v, count + 1))
    }
    Ok((0..n).any(|s| extend(g, s, 1 << s, 1)))
}

#[derive(Clone, Debug, Serialize)]
pub struct HamEncoding {
    /// `vars[i][v]` is `X_{i+1,v}`.
    #[serde(skip)]
    pub vars: Vec<Vec<Var>>,
    pub a: Option<FullFormula>,
    pub b: Option<FullFormula>,
    pub c: Option<FullFormula>,
    pub d: Option<FullFormula>,
    pub e: Option<FullFormula>,
    /// `A∧B∧C∧D∧E`, empty parts dropped.
    pub alpha: FullFormula,
}

/// `X_{i,v}` is named `X_<i>_<vertex name>`.
pub fn encode_alpha(g: &DiGraph) -> HamEncoding {
    let n = g.n();
    let vars: Vec<Vec<Var>> = (1..=n).map(|i| (0..n).map(|v| Var::new(&format!("X_{i}_{}", g.name(v)))).collect()).collect();
    let x = |i: usize, v: usize| FullFormula::Atom(vars[i][v]);
    let excl = |a: FullFormula, b: FullFormula| FullFormula::imp(a, FullFormula::imp(b, FullFormula::Falsum));

    let a = FullFormula::conj((0..n).map(|v| FullFormula::disj((0..n).map(|i| x(i, v))).expect("n > 0")));
    let b = FullFormula::conj(
        (0..n).flat_map(|v| (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (v, i, j)))).map(|(v, i, j)| excl(x(i, v), x(j, v))),
    );
    let c = FullFormula::conj((0..n).map(|i| FullFormula::disj((0..n).map(|v| x(i, v))).expect("n > 0")));
    let d = FullFormula::conj(
        (0..n)
            .flat_map(|v| (0..n).filter(move |&w| w != v).map(move |w| (v, w)))
            .flat_map(|(v, w)| (0..n).map(move |i| (v, w, i)))
            .map(|(v, w, i)| excl(x(i, v), x(i, w))),
    );
    let non_edges: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..n).map(move |w| (v, w))).filter(|&(v, w)| !g.has_edge(v, w)).collect();
    let e =
        FullFormula::conj(non_edges.iter().flat_map(|&(v, w)| (0..n.saturating_sub(1)).map(move |i| (v, w, i))).map(|(v, w, i)| excl(x(i, v), x(i + 1, w))));
    let alpha = FullFormula::conj([&a, &b, &c, &d, &e].into_iter().flatten().cloned()).expect("A is never empty");
    HamEncoding { vars, a, b, c, d, e, alpha }
}

/// Largest variable count `classical_sat` accepts.
pub const SAT_MAX_VARS: usize = 26;

#[derive(Clone, Copy)]
enum Op {
    Var(usize),
    False,
    And,
    Or,
    Imp,
}

fn compile(f: &FullFormula, index: &HashMap<Var, usize>, out: &mut Vec<Op>) {
    match f {
        FullFormula::Atom(v) => out.push(Op::Var(index[v])),
        FullFormula::Falsum => out.push(Op::False),
        FullFormula::And(a, b) | FullFormula::Or(a, b) | FullFormula::Imp(a, b) => {
            compile(a, index, out);
            compile(b, index, out);
            out.push(match f {
                FullFormula::And(..) => Op::And,
                FullFormula::Or(..) => Op::Or,
                _ => Op::Imp,
            });
        }
    }
}

fn top_conjuncts(f: &FullFormula) -> Vec<&FullFormula> {
    let mut out = Vec::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        match g {
            FullFormula::And(a, b) => {
                stack.push(b);
                stack.push(a);
            }
            _ => out.push(g),
        }
    }
    out
}

/// Variable `k < 6` varies inside a 64-bit word.
const LANE: [u64; 6] =
    [0xAAAA_AAAA_AAAA_AAAA, 0xCCCC_CCCC_CCCC_CCCC, 0xF0F0_F0F0_F0F0_F0F0, 0xFF00_FF00_FF00_FF00, 0xFFFF_0000_FFFF_0000, 0xFFFF_FFFF_0000_0000];

/// Truth-table satisfiability, 64 assignments per machine word.
pub fn classical_sat(f: &FullFormula) -> Result<bool> {
    let vars: Vec<Var> = f.vars().into_iter().collect();
    let nv = vars.len();
    if nv > SAT_MAX_VARS {
        return Err(Error::Limit(format!("{nv} variables exceed the limit of {SAT_MAX_VARS}")));
    }
    let index: HashMap<Var, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let programs: Vec<Vec<Op>> = top_conjuncts(f)
        .into_iter()
        .map(|g| {
            let mut p = Vec::new();
            compile(g, &index, &mut p);
            p
        })
        .collect();
    let valid = if nv >= 6 { u64::MAX } else { (1u64 << (1 << nv)) - 1 };
    let eval = |chunk: u64| -> bool {
        let mut stack: Vec<u64> = Vec::with_capacity(64);
        let mut acc = valid;
        for p in &programs {
            for op in p {
                let w = match *op {
                    Op::Var(k) if k < 6 => LANE[k],
                    Op::Var(k) => 0u64.wrapping_sub(chunk >> (k - 6) & 1),
                    Op::False => 0,
                    Op::And | Op::Or | Op::Imp => {
                        let b = stack.pop().expect("binary op");
                        let a = stack.pop().expect("binary op");
                        match *op {
                            Op::And => a & b,
                            Op::Or => a | b,
                            _ => !a | b,
                        }
                    }
                };
                stack.push(w);
            }
            acc &= stack.pop().expect("one result");
            if acc == 0 {
                return false;
            }
        }
        true
    };
    let chunks: u64 = if nv > 6 { 1 << (nv - 6) } else { 1 };
    Ok((0..chunks).into_par_iter().any(eval))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum StatmanAxioms {
    /// Introduction axioms for positive, elimination axioms for negative
    /// occurrences.
    #[default]
    Polarized,
    /// Every axiom for every compound subformula.
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatmanMap {
    /// Compound subformulas (and `⊥`) with their fresh variables, in
    /// enumeration order.
    pub fresh: Vec<(FullFormula, Formula)>,
    pub targets: Vec<Formula>,
    pub axioms: Vec<Formula>,
    pub result: Formula,
}

const POS: u8 = 1;
const NEG: u8 = 2;

pub fn statman_translate(f: &FullFormula) -> (Formula, StatmanMap) {
    statman_translate_with(f, StatmanAxioms::Polarized)
}

/// `γ*`: defining axioms for fresh variables `q_k`, chained by implication
/// into the representative of `f`.
pub fn statman_translate_with(f: &FullFormula, mode: StatmanAxioms) -> (Formula, StatmanMap) {
    // distinct subformulas in post-order, with the polarities they occur in
    let mut order: Vec<FullFormula> = Vec::new();
    let mut pos: HashMap<FullFormula, (usize, u8)> = HashMap::new();
    fn walk(g: &FullFormula, pol: u8, order: &mut Vec<FullFormula>, pos: &mut HashMap<FullFormula, (usize, u8)>) {
        let flip = if pol == POS { NEG } else { POS };
        match g {
            FullFormula::Atom(_) | FullFormula::Falsum => {}
            FullFormula::And(a, b) | FullFormula::Or(a, b) => {
                walk(a, pol, order, pos);
                walk(b, pol, order, pos);
            }
            FullFormula::Imp(a, b) => {
                walk(a, flip, order, pos);
                walk(b, pol, order, pos);
            }
        }
        match pos.get_mut(g) {
            Some(e) => e.1 |= pol,
            None => {
                pos.insert(g.clone(), (order.len(), pol));
                order.push(g.clone());
            }
        }
    }
    walk(f, POS, &mut order, &mut pos);

    let source: BTreeSet<String> = f.vars().into_iter().map(|v| v.name().to_string()).collect();
    let mut prefix = String::from("q_");
    while source.iter().any(|s| s.strip_prefix(&prefix).is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))) {
        prefix.insert(0, 'q');
    }
    let mut rep: Vec<Formula> = Vec::with_capacity(order.len());
    let mut fresh = Vec::new();
    for g in &order {
        let r = match g {
            FullFormula::Atom(v) => Formula::atom(*v),
            _ => {
                let q = Formula::var(&format!("{prefix}{}", fresh.len() + 1));
                fresh.push((g.clone(), q));
                q
            }
        };
        rep.push(r);
    }
    let r = |g: &FullFormula| rep[pos[g].0];
    let mut targets: Vec<Formula> = Vec::new();
    for &t in &rep {
        if !targets.contains(&t) {
            targets.push(t);
        }
    }
    let imp = Formula::imp;
    let mut axioms = Vec::new();
    for g in &order {
        let pol = if mode == StatmanAxioms::Full { POS | NEG } else { pos[g].1 };
        let q = r(g);
        match g {
            FullFormula::Atom(_) => {}
            FullFormula::Falsum => {
                if pol & NEG != 0 {
                    axioms.extend(targets.iter().filter(|&&t| t != q).map(|&t| imp(q, t)));
                }
            }
            FullFormula::And(a, b) => {
                let (a, b) = (r(a), r(b));
                if pol & NEG != 0 {
                    axioms.push(imp(q, a));
                    axioms.push(imp(q, b));
                }
                if pol & POS != 0 {
                    axioms.push(imp(a, imp(b, q)));
                }
            }
            FullFormula::Or(a, b) => {
                let (a, b) = (r(a), r(b));
                if pol & POS != 0 {
                    axioms.push(imp(a, q));
                    axioms.push(imp(b, q));
                }
                if pol & NEG != 0 {
                    for &t in targets.iter().filter(|&&t| t != q) {
                        axioms.push(imp(imp(a, t), imp(imp(b, t), imp(q, t))));
                    }
                }
            }
            FullFormula::Imp(a, b) => {
                let ab = imp(r(a), r(b));
                if pol & NEG != 0 {
                    axioms.push(imp(q, ab));
                }
                if pol & POS != 0 {
                    axioms.push(imp(ab, q));
                }
            }
        }
    }
    let result = Formula::chain(&axioms, r(f));
    (result, StatmanMap { fresh, targets, axioms, result })
}

/// `(α_G → ⊥)*`.
pub fn rho_g(g: &DiGraph) -> Formula {
    let alpha = encode_alpha(g).alpha;
    statman_translate(&FullFormula::imp(alpha, FullFormula::Falsum)).0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(s: &str) -> FullFormula {
        FullFormula::parse(s).unwrap()
    }

    #[test]
    fn graph_format() {
        let g = parse_graph("n 2\nv1 v2\n").unwrap();
        assert_eq!((g.n(), g.edges().len()), (2, 1));
        let g = parse_graph("n 1\n").unwrap();
        assert_eq!((g.n(), g.edges().len()), (1, 0));
        assert!(parse_graph("n 2\nv1 v2\nv1 v2\n").is_err());
        assert!(parse_graph("n 2\nv1 v3\n").is_err());
        assert!(parse_graph("n 2\nv1\n").is_err());
        assert!(parse_graph("n 0\n").is_err());
        let g = parse_graph("n 3\nv1 v2\nv2 v3\nv3 v1\n").unwrap();
        assert_eq!(parse_graph(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn oracle_examples() {
        assert!(hamiltonicity_oracle(&parse_graph("n 3\nv1 v2\nv2 v3\nv3 v1").unwrap()).unwrap());
        assert!(!hamiltonicity_oracle(&DiGraph::new(2, []).unwrap()).unwrap());
        assert!(hamiltonicity_oracle(&DiGraph::new(1, []).unwrap()).unwrap());
        assert!(hamiltonicity_oracle(&DiGraph::new(11, []).unwrap()).is_err());
    }

    #[test]
    fn single_vertex_encoding() {
        let e = encode_alpha(&DiGraph::new(1, []).unwrap());
        assert_eq!(e.a.as_ref().unwrap().to_string(), "X_1_v1");
        assert_eq!(e.c.as_ref().unwrap().to_string(), "X_1_v1");
        assert!(e.b.is_none() && e.d.is_none() && e.e.is_none());
        assert!(classical_sat(&e.alpha).unwrap());
    }

    #[test]
    fn two_vertex_repetition_clauses() {
        let e = encode_alpha(&DiGraph::new(2, [(0, 1)]).unwrap());
        let b = e.b.unwrap().to_string();
        assert!(b.contains("(X_1_v1->X_2_v1->false)"));
        assert!(b.contains("(X_2_v1->X_1_v1->false)"));
        assert_eq!(e.alpha.vars().len(), 4);
    }

    #[test]
    fn sat_examples() {
        assert!(classical_sat(&full("p->p")).unwrap());
        assert!(!classical_sat(&full("false")).unwrap());
        assert!(!classical_sat(&full("p & (p->false)")).unwrap());
        let cyc = encode_alpha(&parse_graph("n 2\nv1 v2\nv2 v1").unwrap());
        assert!(classical_sat(&cyc.alpha).unwrap());
        // seven variables: exercises the chunked lanes
        assert!(classical_sat(&full("a&b&c&d&e&f&(g->false)")).unwrap());
        assert!(!classical_sat(&full("a&b&c&d&e&f&g&(g->false)")).unwrap());
    }

    #[test]
    fn small_graphs_agree_with_oracle() {
        for n in 1..=3 {
            let pairs = n * (n - 1);
            for mask in 0..1u64 << pairs {
                let g = DiGraph::from_mask(n, mask);
                assert_eq!(hamiltonicity_oracle(&g).unwrap(), classical_sat(&encode_alpha(&g).alpha).unwrap(), "{g}");
            }
        }
    }

    #[test]
    fn statman_atom_and_conjunction() {
        let (g, m) = statman_translate(&full("p"));
        assert_eq!(g, Formula::var("p"));
        assert!(m.axioms.is_empty());

        let (_, m) = statman_translate_with(&full("p&q"), StatmanAxioms::Full);
        let shown: Vec<String> = m.axioms.iter().map(|a| a.to_string()).collect();
        assert_eq!(shown, ["q_1->p", "q_1->q", "p->q->q_1"]);
        let (g, m) = statman_translate(&full("p&q"));
        assert_eq!(m.axioms.len(), 1);
        assert_eq!(g.to_string(), "(p->q->q_1)->q_1");
    }

    #[test]
    fn statman_avoids_name_clashes() {
        let (_, m) = statman_translate(&full("q_1 & p"));
        assert_eq!(m.fresh[0].1.to_string(), "qq_1");
    }

    #[test]
    fn statman_cubic_bound_on_small_inputs() {
        for s in ["p|q", "(p|q)->false", "p&q->q&p", "(p|q)->(q|p)", "false->p", "((p->false)->false)->p"] {
            let f = full(s);
            let (g, _) = statman_translate(&f);
            assert!(g.weight() <= f.size().pow(3), "{s}: {} > {}", g.weight(), f.size().pow(3));
        }
    }
}
