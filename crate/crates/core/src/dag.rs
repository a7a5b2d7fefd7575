//! Dag-like deductions with multi-premise merged inferences, the selection
//! function `f`, proper-assumption sets `A_f`, f-threads and unfolding.
//!
//! Levels count down from the root (level 0); every edge goes from a node at
//! level `k + 1` to a node at level `k`, and all leaves sit at the maximal
//! level.
//!
//! `A_f` is evaluated per edge from the leaves downward. Traversing an edge
//! into an `(→I)` conclusion, or into a merged node through its
//! introduction premise, discharges the corresponding antecedent; at merged
//! nodes only the in-edges selected by `f(e, ·)` contribute to an out-edge
//! `e`. The root receives one virtual out-edge `e_r`, and the deduction
//! proves its conclusion iff it is `A_f`-correct and `A_f(e_r) = ∅`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::tree::{self, RuleJson, TreeBuilder, TreeDeduction, TreeRule, Violation};

pub type NodeId = usize;
/// `(source, target)`: the source is a premise of the target.
pub type Edge = (NodeId, NodeId);
pub type FMap = BTreeMap<(Edge, Formula), BTreeSet<Edge>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PremiseGroup {
    /// `γ, γ→β` feeding conclusion `β`.
    TwinPair { minor: NodeId, major: NodeId },
    /// `β` feeding conclusion `α→β`, discharging `α`.
    IPrem { body: NodeId },
    /// Premise with the conclusion's own label.
    RepPrem { body: NodeId },
}

impl PremiseGroup {
    pub fn nodes(&self) -> Vec<NodeId> {
        match *self {
            PremiseGroup::TwinPair { minor, major } => vec![minor, major],
            PremiseGroup::IPrem { body } | PremiseGroup::RepPrem { body } => vec![body],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DagRule {
    Assumption,
    ImpI { discharged: Formula, body: NodeId },
    ImpE { minor: NodeId, major: NodeId },
    Rep { body: NodeId },
    Merged(Vec<PremiseGroup>),
}

impl DagRule {
    pub fn premises(&self) -> Vec<NodeId> {
        match self {
            DagRule::Assumption => vec![],
            DagRule::ImpI { body, .. } | DagRule::Rep { body } => vec![*body],
            DagRule::ImpE { minor, major } => vec![*minor, *major],
            DagRule::Merged(groups) => {
                let mut v: Vec<NodeId> = groups.iter().flat_map(|g| g.nodes()).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    pub fn is_merged(&self) -> bool {
        matches!(self, DagRule::Merged(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagNode {
    pub label: Formula,
    pub level: usize,
    pub rule: DagRule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagDeduction {
    pub nodes: Vec<DagNode>,
    pub root: NodeId,
    pub f: FMap,
}

/// Edge numbering and adjacency derived from the rules.
#[derive(Clone, Debug)]
pub struct DagIndex {
    pub edges: Vec<Edge>,
    pub edge_id: HashMap<Edge, usize>,
    pub ie: Vec<Vec<usize>>,
    pub oe: Vec<Vec<usize>>,
    /// Formula discharged by traversing the edge into its target, if any.
    pub closes: Vec<Option<Formula>>,
}

impl DagIndex {
    pub fn new(d: &DagDeduction) -> DagIndex {
        let mut edges: Vec<Edge> = Vec::new();
        for (x, n) in d.nodes.iter().enumerate() {
            for p in n.rule.premises() {
                edges.push((p, x));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let edge_id: HashMap<Edge, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut ie = vec![Vec::new(); d.nodes.len()];
        let mut oe = vec![Vec::new(); d.nodes.len()];
        let mut closes = vec![None; edges.len()];
        for (i, &(s, t)) in edges.iter().enumerate() {
            if s < d.nodes.len() {
                oe[s].push(i);
            }
            if t < d.nodes.len() {
                ie[t].push(i);
                closes[i] = d.edge_discharge(s, t);
            }
        }
        DagIndex { edges, edge_id, ie, oe, closes }
    }
}

impl DagDeduction {
    pub fn conclusion(&self) -> Formula {
        self.nodes[self.root].label
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index(&self) -> DagIndex {
        DagIndex::new(self)
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.index().edges.len()
    }

    /// Sum of label weights plus number of edges.
    pub fn weight(&self) -> u64 {
        self.nodes.iter().map(|n| n.label.weight()).sum::<u64>() + self.edge_count() as u64
    }

    pub fn phi(&self) -> u64 {
        self.nodes.iter().map(|n| n.label).collect::<BTreeSet<_>>().into_iter().map(Formula::weight).sum()
    }

    /// Labels of the leaves.
    pub fn assumptions(&self) -> BTreeSet<Formula> {
        self.nodes.iter().filter(|n| n.rule == DagRule::Assumption).map(|n| n.label).collect()
    }

    /// Discharge realized by a path that passes from `s` into `t`. A merged
    /// premise that also serves as a twin premise counts as not discharging.
    fn edge_discharge(&self, s: NodeId, t: NodeId) -> Option<Formula> {
        match &self.nodes[t].rule {
            DagRule::ImpI { discharged, .. } => Some(*discharged),
            DagRule::Merged(groups) => {
                let intro = groups.contains(&PremiseGroup::IPrem { body: s });
                let twin = groups.iter().any(|g| matches!(*g, PremiseGroup::TwinPair { minor, major } if minor == s || major == s));
                if intro && !twin {
                    self.nodes[t].label.as_imp().map(|(a, _)| a)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// `f(e, ·)` grouped by out-edge.
    fn f_by_edge(&self) -> HashMap<Edge, Vec<(Formula, &BTreeSet<Edge>)>> {
        let mut out: HashMap<Edge, Vec<(Formula, &BTreeSet<Edge>)>> = HashMap::new();
        for ((e, a), sel) in &self.f {
            out.entry(*e).or_default().push((*a, sel));
        }
        out
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DagReport {
    pub correct: bool,
    pub violations: Vec<Violation>,
}

fn bad(v: &mut Vec<Violation>, node: NodeId, reason: impl Into<String>) {
    v.push(Violation { node, reason: reason.into() });
}

/// Shape, levels, rule schemas, root restriction and the domain of `f`.
pub fn check_dag(d: &DagDeduction) -> DagReport {
    let mut v = Vec::new();
    let n = d.nodes.len();
    if d.root >= n {
        bad(&mut v, d.root, "root out of range");
        return DagReport { correct: false, violations: v };
    }
    for (x, node) in d.nodes.iter().enumerate() {
        for p in node.rule.premises() {
            if p >= n {
                bad(&mut v, x, format!("premise {p} out of range"));
            }
        }
    }
    if !v.is_empty() {
        return DagReport { correct: false, violations: v };
    }
    let idx = d.index();
    let h = d.height();
    if d.nodes[d.root].level != 0 {
        bad(&mut v, d.root, "root must be at level 0");
    }
    for &(s, t) in &idx.edges {
        if d.nodes[s].level != d.nodes[t].level + 1 {
            bad(&mut v, t, format!("edge from {s} does not span exactly one level"));
        }
    }
    for (x, node) in d.nodes.iter().enumerate() {
        if node.rule == DagRule::Assumption && node.level != h {
            bad(&mut v, x, "leaf not at the maximal level");
        }
        if x != d.root && idx.oe[x].is_empty() {
            bad(&mut v, x, "node has no conclusion below it");
        }
        if x == d.root && !idx.oe[x].is_empty() {
            bad(&mut v, x, "root is used as a premise");
        }
    }
    for (x, node) in d.nodes.iter().enumerate() {
        let lab = |y: NodeId| d.nodes[y].label;
        match &node.rule {
            DagRule::Assumption => {}
            DagRule::ImpI { discharged, body } => {
                if Formula::imp(*discharged, lab(*body)) != node.label {
                    bad(&mut v, x, format!("label not an implication from {discharged} to the premise"));
                }
            }
            DagRule::ImpE { minor, major } => {
                if Formula::imp(lab(*minor), node.label) != lab(*major) {
                    bad(&mut v, x, "major premise mismatch");
                }
            }
            DagRule::Rep { body } => {
                if lab(*body) != node.label {
                    bad(&mut v, x, "repetition premise differs from conclusion");
                }
            }
            DagRule::Merged(groups) => {
                if groups.len() < 2 {
                    bad(&mut v, x, "merged inference needs at least 2 premise groups");
                }
                let mut minors = BTreeSet::new();
                let mut intros = 0;
                let mut seen = BTreeSet::new();
                for g in groups {
                    if !seen.insert(*g) {
                        bad(&mut v, x, "duplicate premise group");
                    }
                    match *g {
                        PremiseGroup::TwinPair { minor, major } => {
                            if Formula::imp(lab(minor), node.label) != lab(major) {
                                bad(&mut v, x, "twin premises do not match the conclusion");
                            }
                            if !minors.insert(lab(minor)) {
                                bad(&mut v, x, "twin minors must be distinct");
                            }
                        }
                        PremiseGroup::IPrem { body } => {
                            intros += 1;
                            match node.label.as_imp() {
                                Some((_, b)) if b == lab(body) => {}
                                _ => bad(&mut v, x, "introduction premise does not match the conclusion"),
                            }
                        }
                        PremiseGroup::RepPrem { body } => {
                            if lab(body) != node.label {
                                bad(&mut v, x, "repetition premise differs from conclusion");
                            }
                        }
                    }
                }
                if intros > 1 {
                    bad(&mut v, x, "at most one introduction premise per merged inference");
                }
            }
        }
    }
    if !matches!(d.nodes[d.root].rule, DagRule::ImpI { .. } | DagRule::ImpE { .. }) {
        bad(&mut v, d.root, "root inference must be (→I) or (→E)");
    }
    let assumptions = d.assumptions();
    for (&((s, t), a), sel) in &d.f {
        if !idx.edge_id.contains_key(&(s, t)) {
            bad(&mut v, s.min(n - 1), format!("f defined on a non-edge ({s},{t})"));
            continue;
        }
        if !d.nodes[s].rule.is_merged() {
            bad(&mut v, s, "f undefined outside Merged");
        }
        if !assumptions.contains(&a) {
            bad(&mut v, s, format!("f argument {a} is not an assumption"));
        }
        for &(s2, t2) in sel {
            if t2 != s || !idx.edge_id.contains_key(&(s2, t2)) {
                bad(&mut v, s, format!("f selects ({s2},{t2}), not an ingoing edge"));
            }
        }
    }
    DagReport { correct: v.is_empty(), violations: v }
}

/// Fixed-width set of assumption indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AssumptionSet(Vec<u64>);

impl AssumptionSet {
    fn empty(width: usize) -> Self {
        AssumptionSet(vec![0; width.div_ceil(64).max(1)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn union_with(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= *b;
        }
    }
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b))
    }
    fn words(&self) -> u64 {
        self.0.len() as u64
    }
}

/// `A_f` for every edge plus the virtual root edge.
#[derive(Clone, Debug)]
pub struct AfTable {
    /// Sorted assumption labels; set members index into this.
    pub assumptions: Vec<Formula>,
    pub edges: Vec<Edge>,
    pub sets: Vec<AssumptionSet>,
    pub root: AssumptionSet,
    /// Elementary word operations spent computing the table.
    pub steps: u64,
}

impl AfTable {
    pub fn get(&self, e: Edge) -> Option<BTreeSet<Formula>> {
        let i = self.edges.binary_search(&e).ok()?;
        Some(self.formulas(&self.sets[i]))
    }

    pub fn root_set(&self) -> BTreeSet<Formula> {
        self.formulas(&self.root)
    }

    pub fn formulas(&self, s: &AssumptionSet) -> BTreeSet<Formula> {
        s.iter().map(|i| self.assumptions[i]).collect()
    }
}

struct AfContext {
    idx: DagIndex,
    assumptions: Vec<Formula>,
    pos: HashMap<Formula, usize>,
}

impl AfContext {
    fn new(d: &DagDeduction) -> Self {
        let assumptions: Vec<Formula> = d.assumptions().into_iter().collect();
        let pos = assumptions.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        AfContext { idx: d.index(), assumptions, pos }
    }

    /// `A_f(e') \ {discharge of e'}`.
    fn contribution(&self, sets: &[AssumptionSet], e: usize, steps: &mut u64) -> AssumptionSet {
        let mut s = sets[e].clone();
        *steps += s.words();
        if let Some(a) = self.idx.closes[e] {
            if let Some(&i) = self.pos.get(&a) {
                s.remove(i);
            }
            *steps += 1;
        }
        s
    }
}

/// Computes `A_f` bottom-up by level.
pub fn compute_af(d: &DagDeduction) -> Result<AfTable> {
    let ctx = AfContext::new(d);
    compute_af_with(d, &ctx)
}

fn compute_af_with(d: &DagDeduction, ctx: &AfContext) -> Result<AfTable> {
    let idx = &ctx.idx;
    let width = ctx.assumptions.len();
    let mut sets = vec![AssumptionSet::empty(width); idx.edges.len()];
    let mut steps = 0u64;
    let fmap = d.f_by_edge();
    let mut order: Vec<NodeId> = (0..d.nodes.len()).collect();
    order.sort_by_key(|&x| std::cmp::Reverse(d.nodes[x].level));
    let in_union = |x: NodeId, sets: &[AssumptionSet], steps: &mut u64| {
        let mut u = AssumptionSet::empty(width);
        for &e in &idx.ie[x] {
            u.union_with(&ctx.contribution(sets, e, steps));
            *steps += u.words();
        }
        u
    };
    for x in order {
        let node = &d.nodes[x];
        match &node.rule {
            DagRule::Assumption => {
                let mut s = AssumptionSet::empty(width);
                s.insert(ctx.pos[&node.label]);
                for &e in &idx.oe[x] {
                    sets[e] = s.clone();
                    steps += s.words();
                }
            }
            DagRule::ImpI { .. } | DagRule::ImpE { .. } | DagRule::Rep { .. } => {
                let u = in_union(x, &sets, &mut steps);
                for &e in &idx.oe[x] {
                    sets[e] = u.clone();
                    steps += u.words();
                }
            }
            DagRule::Merged(_) => {
                for &e in &idx.oe[x] {
                    let edge = idx.edges[e];
                    let entries = fmap.get(&edge).ok_or_else(|| Error::Invalid(format!("f incomplete at node {x}")))?;
                    let mut s = AssumptionSet::empty(width);
                    for (_, sel) in entries {
                        for sel_edge in sel.iter() {
                            steps += 1;
                            let Some(&ep) = idx.edge_id.get(sel_edge) else {
                                return Err(Error::Invalid(format!("f selects a non-edge at node {x}")));
                            };
                            s.union_with(&ctx.contribution(&sets, ep, &mut steps));
                            steps += s.words();
                        }
                    }
                    sets[e] = s;
                }
            }
        }
    }
    let root = match d.nodes[d.root].rule {
        DagRule::Merged(_) => return Err(Error::Invalid("merged root".into())),
        _ => in_union(d.root, &sets, &mut steps),
    };
    Ok(AfTable { assumptions: ctx.assumptions.clone(), edges: idx.edges.clone(), sets, root, steps })
}

/// Why an `A_f` table fails correctness, if it does.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AfDefect {
    /// An ingoing edge of a merged node is never selected by `f`.
    Unselected { node: NodeId, edge: Edge },
    /// `α ∈ A_f(e)` without a selected in-edge carrying `α`.
    Unsupported { node: NodeId, edge: Edge, assumption: Formula },
}

fn af_defects(d: &DagDeduction, ctx: &AfContext, t: &AfTable, steps: &mut u64) -> Vec<AfDefect> {
    let idx = &ctx.idx;
    let mut out = Vec::new();
    let mut selected: HashMap<NodeId, BTreeSet<Edge>> = HashMap::new();
    for (((s, _), _), sel) in &d.f {
        *steps += sel.len() as u64;
        selected.entry(*s).or_default().extend(sel.iter().copied());
    }
    let none = BTreeSet::new();
    for (x, node) in d.nodes.iter().enumerate() {
        if !node.rule.is_merged() {
            continue;
        }
        let selected = selected.get(&x).unwrap_or(&none);
        for &e in &idx.ie[x] {
            *steps += 1;
            if !selected.contains(&idx.edges[e]) {
                out.push(AfDefect::Unselected { node: x, edge: idx.edges[e] });
            }
        }
        for &e in &idx.oe[x] {
            let edge = idx.edges[e];
            for i in t.sets[e].iter() {
                let a = ctx.assumptions[i];
                *steps += 1;
                let supported = d.f.get(&(edge, a)).is_some_and(|sel| {
                    sel.iter().any(|se| {
                        *steps += 1;
                        idx.edge_id.get(se).is_some_and(|&ep| t.sets[ep].contains(i) && idx.closes[ep] != Some(a))
                    })
                });
                if !supported {
                    out.push(AfDefect::Unsupported { node: x, edge, assumption: a });
                }
            }
        }
    }
    out
}

/// Clause-5 correctness of `t` at every merged node.
pub fn check_af_correctness(d: &DagDeduction, t: &AfTable) -> bool {
    let ctx = AfContext::new(d);
    af_defects(d, &ctx, t, &mut 0).is_empty()
}

pub fn af_correctness_defects(d: &DagDeduction, t: &AfTable) -> Vec<AfDefect> {
    let ctx = AfContext::new(d);
    af_defects(d, &ctx, t, &mut 0)
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub proves: bool,
    pub af_correct: bool,
    /// Undischarged assumptions at the virtual root edge.
    pub open: Vec<Formula>,
    pub defects: Vec<AfDefect>,
    pub steps: u64,
}

/// Polynomial-time provability check with step accounting.
pub fn verify_dag_report(d: &DagDeduction) -> Result<Verification> {
    let ctx = AfContext::new(d);
    let t = compute_af_with(d, &ctx)?;
    let mut steps = t.steps;
    let defects = af_defects(d, &ctx, &t, &mut steps);
    let af_correct = defects.is_empty();
    let open: Vec<Formula> = t.root_set().into_iter().collect();
    steps += t.root.words();
    Ok(Verification { proves: af_correct && open.is_empty(), af_correct, open, defects, steps })
}

pub fn verify_dag(d: &DagDeduction) -> Result<bool> {
    Ok(verify_dag_report(d)?.proves)
}

/// Upper bound on enumerated threads before giving up.
pub const THREAD_LIMIT: usize = 1_000_000;

/// All f-threads, leaf first, each with its closure flag.
pub fn enumerate_f_threads(d: &DagDeduction) -> Result<Vec<(Vec<NodeId>, bool)>> {
    let idx = d.index();
    let mut out = Vec::new();
    for (x0, node) in d.nodes.iter().enumerate() {
        if node.rule != DagRule::Assumption {
            continue;
        }
        let alpha = node.label;
        // DFS over partial threads: (path, closed)
        let mut stack = vec![(vec![x0], false)];
        while let Some((path, closed)) = stack.pop() {
            let cur = *path.last().unwrap();
            if cur == d.root {
                out.push((path, closed));
                if out.len() > THREAD_LIMIT {
                    return Err(Error::Limit(format!("more than {THREAD_LIMIT} f-threads")));
                }
                continue;
            }
            let prev = path.len().checked_sub(2).map(|i| path[i]);
            for &e in idx.oe[cur].iter().rev() {
                let (_, next) = idx.edges[e];
                if let (Some(p), true) = (prev, d.nodes[cur].rule.is_merged()) {
                    let ok = d.f.get(&((cur, next), alpha)).is_some_and(|sel| sel.contains(&(p, cur)));
                    if !ok {
                        continue;
                    }
                }
                let step_closes = idx.closes[e] == Some(alpha);
                let mut p2 = path.clone();
                p2.push(next);
                stack.push((p2, closed || step_closes));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Brute-force provability: every f-thread is closed.
pub fn verify_by_threads(d: &DagDeduction) -> Result<bool> {
    Ok(enumerate_f_threads(d)?.iter().all(|(_, closed)| *closed))
}

/// Node budget for unfolding.
pub const UNFOLD_LIMIT: usize = 5_000_000;

/// Unfolds a verified dag into a tree with `Rep(n)` at merged nodes; at a
/// merged node reached through out-edge `e` only the premise groups selected
/// by `f(e, ·)` are kept.
pub fn unfold_dag(d: &DagDeduction) -> Result<TreeDeduction> {
    if !verify_dag(d)? {
        return Err(Error::Invalid("dag does not verify".into()));
    }
    unfold_unchecked(d)
}

pub(crate) fn unfold_unchecked(d: &DagDeduction) -> Result<TreeDeduction> {
    let fmap = d.f_by_edge();
    let mut out = TreeBuilder::new();
    let mut count = 0usize;

    fn go(
        d: &DagDeduction,
        fmap: &HashMap<Edge, Vec<(Formula, &BTreeSet<Edge>)>>,
        x: NodeId,
        via: Option<Edge>,
        out: &mut TreeBuilder,
        count: &mut usize,
    ) -> Result<tree::NodeId> {
        *count += 1;
        if *count > UNFOLD_LIMIT {
            return Err(Error::Limit(format!("unfolding exceeds {UNFOLD_LIMIT} nodes")));
        }
        let node = &d.nodes[x];
        let sub = |y: NodeId, out: &mut TreeBuilder, count: &mut usize| go(d, fmap, y, Some((y, x)), out, count);
        Ok(match &node.rule {
            DagRule::Assumption => out.assume(node.label),
            DagRule::ImpI { discharged, body } => {
                let b = sub(*body, out, count)?;
                out.imp_i(*discharged, b)
            }
            DagRule::ImpE { minor, major } => {
                let a = sub(*minor, out, count)?;
                let b = sub(*major, out, count)?;
                out.raw(node.label, TreeRule::ImpE, vec![a, b])
            }
            DagRule::Rep { body } => {
                let b = sub(*body, out, count)?;
                out.raw(node.label, TreeRule::Rep(1), vec![b])
            }
            DagRule::Merged(groups) => {
                let via = via.ok_or_else(|| Error::Inconsistent("merged root".into()))?;
                let keep: BTreeSet<Edge> = fmap.get(&via).map(|v| v.iter().flat_map(|(_, sel)| sel.iter().copied()).collect()).unwrap_or_default();
                let kept: Vec<&PremiseGroup> = groups.iter().filter(|g| g.nodes().iter().all(|&y| keep.contains(&(y, x)))).collect();
                for e in &keep {
                    if !kept.iter().any(|g| g.nodes().contains(&e.0)) {
                        return Err(Error::Inconsistent(format!("selected edge ({},{}) at node {x} completes no premise group", e.0, e.1)));
                    }
                }
                let mut parts = Vec::new();
                for g in kept {
                    let t = match *g {
                        PremiseGroup::TwinPair { minor, major } => {
                            let a = sub(minor, out, count)?;
                            let b = sub(major, out, count)?;
                            out.raw(node.label, TreeRule::ImpE, vec![a, b])
                        }
                        PremiseGroup::IPrem { body } => {
                            let (alpha, _) = node.label.as_imp().expect("checked intro premise");
                            let b = sub(body, out, count)?;
                            out.imp_i(alpha, b)
                        }
                        PremiseGroup::RepPrem { body } => sub(body, out, count)?,
                    };
                    parts.push(t);
                }
                match parts.len() {
                    0 => return Err(Error::Inconsistent(format!("no premise group selected at node {x}"))),
                    1 => parts[0],
                    _ => out.rep(parts),
                }
            }
        })
    }

    let root = go(d, &fmap, d.root, None, &mut out, &mut count)?;
    Ok(out.finish(root))
}

/// Views a tree deduction as a dag with empty `f`, leveling it first.
pub fn as_dag(t: &TreeDeduction) -> Result<DagDeduction> {
    let t = tree::level_tree(t);
    let depth = t.depths();
    let mut nodes = Vec::with_capacity(t.len());
    for (x, n) in t.nodes.iter().enumerate() {
        let rule = match n.rule {
            TreeRule::Assumption => DagRule::Assumption,
            TreeRule::ImpI(a) => DagRule::ImpI { discharged: a, body: n.premises[0] },
            TreeRule::ImpE => DagRule::ImpE { minor: n.premises[0], major: n.premises[1] },
            TreeRule::Rep(1) => DagRule::Rep { body: n.premises[0] },
            TreeRule::Rep(k) => return Err(Error::Invalid(format!("Rep({k}) at node {x} has no dag counterpart"))),
        };
        nodes.push(DagNode { label: n.label, level: depth[x], rule });
    }
    Ok(DagDeduction { nodes, root: t.root, f: FMap::new() })
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DagJson {
    pub nodes: Vec<DagNodeJson>,
    pub edges: Vec<[usize; 2]>,
    pub root: usize,
    #[serde(default)]
    pub f_map: Vec<FEntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DagNodeJson {
    pub id: usize,
    pub label: Formula,
    pub level: usize,
    pub rule: RuleJson,
    #[serde(default)]
    pub premises: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupJson {
    Twin { minor: usize, major: usize },
    Intro { body: usize },
    Rep { body: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FEntryJson {
    pub edge: [usize; 2],
    pub assumption: Formula,
    pub selected: Vec<[usize; 2]>,
}

impl DagDeduction {
    pub fn to_json(&self) -> DagJson {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let (tag, discharge, groups) = match &n.rule {
                    DagRule::Assumption => ("Assumption", None, vec![]),
                    DagRule::ImpI { discharged, .. } => ("ImpI", Some(*discharged), vec![]),
                    DagRule::ImpE { .. } => ("ImpE", None, vec![]),
                    DagRule::Rep { .. } => ("Rep", None, vec![]),
                    DagRule::Merged(gs) => (
                        "Merged",
                        None,
                        gs.iter()
                            .map(|g| match *g {
                                PremiseGroup::TwinPair { minor, major } => GroupJson::Twin { minor, major },
                                PremiseGroup::IPrem { body } => GroupJson::Intro { body },
                                PremiseGroup::RepPrem { body } => GroupJson::Rep { body },
                            })
                            .collect(),
                    ),
                };
                DagNodeJson { id, label: n.label, level: n.level, rule: RuleJson { tag: tag.into(), discharge }, premises: n.rule.premises_ordered(), groups }
            })
            .collect();
        let edges = self.index().edges.iter().map(|&(s, t)| [s, t]).collect();
        let mut f_map: Vec<FEntryJson> = self
            .f
            .iter()
            .map(|(((s, t), a), sel)| FEntryJson { edge: [*s, *t], assumption: *a, selected: sel.iter().map(|&(x, y)| [x, y]).collect() })
            .collect();
        f_map.sort_by_cached_key(|e| (e.edge, e.assumption.to_string()));
        DagJson { nodes, edges, root: self.root, f_map }
    }

    pub fn from_json(j: &DagJson) -> Result<DagDeduction> {
        let mut index = HashMap::new();
        for (i, n) in j.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::Invalid(format!("duplicate node id {}", n.id)));
            }
        }
        let id = |x: usize| index.get(&x).copied().ok_or_else(|| Error::Invalid(format!("unknown node id {x}")));
        let mut nodes = Vec::with_capacity(j.nodes.len());
        for n in &j.nodes {
            let prem = n.premises.iter().map(|&p| id(p)).collect::<Result<Vec<_>>>()?;
            let arity = |k: usize| -> Result<()> {
                if prem.len() == k {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("node {}: {} needs {k} premises", n.id, n.rule.tag)))
                }
            };
            let rule = match n.rule.tag.as_str() {
                "Assumption" => {
                    arity(0)?;
                    DagRule::Assumption
                }
                "ImpI" => {
                    arity(1)?;
                    let discharged = n.rule.discharge.ok_or_else(|| Error::Invalid(format!("node {}: ImpI without discharge", n.id)))?;
                    DagRule::ImpI { discharged, body: prem[0] }
                }
                "ImpE" => {
                    arity(2)?;
                    DagRule::ImpE { minor: prem[0], major: prem[1] }
                }
                "Rep" => {
                    arity(1)?;
                    DagRule::Rep { body: prem[0] }
                }
                "Merged" => DagRule::Merged(
                    n.groups
                        .iter()
                        .map(|g| {
                            Ok(match *g {
                                GroupJson::Twin { minor, major } => PremiseGroup::TwinPair { minor: id(minor)?, major: id(major)? },
                                GroupJson::Intro { body } => PremiseGroup::IPrem { body: id(body)? },
                                GroupJson::Rep { body } => PremiseGroup::RepPrem { body: id(body)? },
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                ),
                other => return Err(Error::Invalid(format!("unknown rule tag {other:?}"))),
            };
            nodes.push(DagNode { label: n.label, level: n.level, rule });
        }
        let edge = |[s, t]: [usize; 2]| -> Result<Edge> { Ok((id(s)?, id(t)?)) };
        let mut f = FMap::new();
        for entry in &j.f_map {
            let sel = entry.selected.iter().map(|&e| edge(e)).collect::<Result<BTreeSet<_>>>()?;
            f.insert((edge(entry.edge)?, entry.assumption), sel);
        }
        let d = DagDeduction { nodes, root: id(j.root)?, f };
        let listed = j.edges.iter().map(|&e| edge(e)).collect::<Result<BTreeSet<_>>>()?;
        let derived: BTreeSet<Edge> = d.index().edges.into_iter().collect();
        if listed != derived {
            return Err(Error::Invalid("edge list disagrees with the inference premises".into()));
        }
        Ok(d)
    }
}

impl DagRule {
    /// Premises in rule order (minor before major), for serialization.
    pub fn premises_ordered(&self) -> Vec<NodeId> {
        match self {
            DagRule::Merged(_) => vec![],
            _ => self.premises_raw(),
        }
    }

    fn premises_raw(&self) -> Vec<NodeId> {
        match self {
            DagRule::Assumption | DagRule::Merged(_) => vec![],
            DagRule::ImpI { body, .. } | DagRule::Rep { body } => vec![*body],
            DagRule::ImpE { minor, major } => vec![*minor, *major],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{check_tree, proves_tree};

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    /// `q` derived twice (from `p, p→q` and as an assumption), then three
    /// introductions discharge everything.
    fn merged_example() -> DagDeduction {
        let node = |label: &str, level, rule| DagNode { label: f(label), level, rule };
        let nodes = vec![
            node("p", 4, DagRule::Assumption),
            node("p->q", 4, DagRule::Assumption),
            node("q", 4, DagRule::Assumption),
            node("q", 3, DagRule::Merged(vec![PremiseGroup::TwinPair { minor: 0, major: 1 }, PremiseGroup::RepPrem { body: 2 }])),
            node("p->q", 2, DagRule::ImpI { discharged: f("p"), body: 3 }),
            node("(p->q)->p->q", 1, DagRule::ImpI { discharged: f("p->q"), body: 4 }),
            node("q->(p->q)->p->q", 0, DagRule::ImpI { discharged: f("q"), body: 5 }),
        ];
        let mut fm = FMap::new();
        let twin: BTreeSet<Edge> = [(0, 3), (1, 3)].into();
        fm.insert(((3, 4), f("p")), twin.clone());
        fm.insert(((3, 4), f("p->q")), twin);
        fm.insert(((3, 4), f("q")), [(2, 3)].into());
        DagDeduction { nodes, root: 6, f: fm }
    }

    #[test]
    fn merged_example_verifies() {
        let d = merged_example();
        assert!(check_dag(&d).correct, "{:?}", check_dag(&d).violations);
        let t = compute_af(&d).unwrap();
        assert_eq!(t.get((3, 4)).unwrap(), [f("p"), f("p->q"), f("q")].into());
        assert_eq!(t.get((4, 5)).unwrap(), [f("p->q"), f("q")].into());
        assert!(t.root_set().is_empty());
        assert!(check_af_correctness(&d, &t));
        assert!(verify_dag(&d).unwrap());
        assert!(verify_by_threads(&d).unwrap());
        assert_eq!(enumerate_f_threads(&d).unwrap().len(), 3);
    }

    #[test]
    fn unfolding_keeps_both_groups() {
        let t = unfold_dag(&merged_example()).unwrap();
        assert!(check_tree(&t).locally_correct);
        assert!(proves_tree(&t));
        assert_eq!(t.nodes[t.root].label, f("q->(p->q)->p->q"));
        assert!(t.nodes.iter().any(|n| n.rule == TreeRule::Rep(2)));
    }

    #[test]
    fn unsupported_selection_is_not_af_correct() {
        let mut d = merged_example();
        d.f.insert(((3, 4), f("p")), [(2, 3)].into());
        let t = compute_af(&d).unwrap();
        let defects = af_correctness_defects(&d, &t);
        assert_eq!(defects, vec![AfDefect::Unsupported { node: 3, edge: (3, 4), assumption: f("p") }]);
        assert!(!verify_dag(&d).unwrap());
    }

    #[test]
    fn open_assumption_is_reported() {
        let mut d = merged_example();
        // drop the outermost introduction: q stays open
        d.nodes.truncate(6);
        d.root = 5;
        for n in &mut d.nodes {
            n.level -= 1;
        }
        let r = verify_dag_report(&d).unwrap();
        assert!(r.af_correct);
        assert_eq!(r.open, vec![f("q")]);
        assert!(!r.proves);
        assert!(!verify_by_threads(&d).unwrap());
    }

    #[test]
    fn unselected_edge_is_a_defect() {
        let mut d = merged_example();
        d.f.remove(&((3, 4), f("q")));
        let t = compute_af(&d).unwrap();
        assert!(af_correctness_defects(&d, &t).contains(&AfDefect::Unselected { node: 3, edge: (2, 3) }));
    }

    #[test]
    fn structural_violations() {
        let mut d = merged_example();
        d.f.insert(((4, 5), f("p")), BTreeSet::new());
        let r = check_dag(&d);
        assert!(r.violations.iter().any(|v| v.reason == "f undefined outside Merged"));

        let mut d = merged_example();
        d.nodes[3].rule = DagRule::Merged(vec![PremiseGroup::TwinPair { minor: 0, major: 1 }, PremiseGroup::TwinPair { minor: 0, major: 1 }]);
        let r = check_dag(&d);
        assert!(r.violations.iter().any(|v| v.reason == "twin minors must be distinct"));

        let mut d = merged_example();
        d.nodes[2].level = 3;
        assert!(!check_dag(&d).correct);
    }

    #[test]
    fn json_round_trip() {
        let d = merged_example();
        let j = serde_json::to_string(&d.to_json()).unwrap();
        let back = DagDeduction::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, d);
        let mut bad_edges: DagJson = serde_json::from_str(&j).unwrap();
        bad_edges.edges.pop();
        assert!(DagDeduction::from_json(&bad_edges).is_err());
    }

    #[test]
    fn tree_as_dag() {
        let mut b = TreeBuilder::new();
        let p = b.assume(f("p"));
        let pq = b.assume(f("p->q"));
        let q = b.imp_e(p, pq);
        let r1 = b.imp_i(f("p"), q);
        let r = b.imp_i(f("p->q"), r1);
        let t = b.finish(r);
        let d = as_dag(&t).unwrap();
        assert!(check_dag(&d).correct);
        assert!(verify_dag(&d).unwrap());
        assert_eq!(d.height(), 3);
        let back = unfold_dag(&d).unwrap();
        assert_eq!(back.conclusion(), t.conclusion());
        assert_eq!(back.len(), t.len());
    }
}
