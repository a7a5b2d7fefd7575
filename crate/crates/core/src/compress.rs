//! Horizontal compression of leveled tree proofs into dags, and the
//! certification pipeline: merge equal labels per level, pick a fundamental
//! set of paths, prune to it, read `f` off the surviving paths and verify.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::dag::{self, DagDeduction, DagIndex, DagNode, DagRule, Edge, FMap, NodeId, PremiseGroup};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::tree::{self, TreeDeduction, TreeRule};

/// Level-preserving surjection from tree nodes onto dag nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeMap {
    pub tree_to_dag: Vec<NodeId>,
}

/// A root-first dag path `[r, y₁, …, y_h]` (`y_i` at level `i`) together
/// with the tree leaf it was obtained from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DagPath {
    pub nodes: Vec<NodeId>,
    pub origin: tree::NodeId,
}

impl DagPath {
    pub fn leaf(&self) -> NodeId {
        *self.nodes.last().expect("paths are nonempty")
    }

    /// Edges leaf first, as `(premise, conclusion)`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.nodes.windows(2).rev().map(|w| (w[1], w[0]))
    }
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    children: BTreeMap<NodeId, usize>,
    /// First path (in enumeration order) through this prefix.
    first: usize,
}

/// A set of dag paths, deduplicated, kept in enumeration order and indexed
/// by a prefix trie for tail-matching lookups.
#[derive(Clone, Debug, Default)]
pub struct PathFamily {
    paths: Vec<DagPath>,
    trie: Vec<TrieNode>,
    /// `at[j][i]`: trie node of `paths[j].nodes[..=i]`.
    at: Vec<Vec<usize>>,
}

impl PathFamily {
    pub fn new(paths: impl IntoIterator<Item = DagPath>) -> PathFamily {
        let mut fam = PathFamily { paths: Vec::new(), trie: vec![TrieNode::default()], at: Vec::new() };
        for p in paths {
            fam.push(p);
        }
        fam
    }

    fn push(&mut self, p: DagPath) -> bool {
        let j = self.paths.len();
        let mut cur = 0;
        let mut at = Vec::with_capacity(p.nodes.len());
        let mut fresh = false;
        for &y in &p.nodes {
            cur = match self.trie[cur].children.get(&y) {
                Some(&c) => c,
                None => {
                    fresh = true;
                    self.trie.push(TrieNode { children: BTreeMap::new(), first: j });
                    let c = self.trie.len() - 1;
                    self.trie[cur].children.insert(y, c);
                    c
                }
            };
            at.push(cur);
        }
        if fresh {
            self.paths.push(p);
            self.at.push(at);
        }
        fresh
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[DagPath] {
        &self.paths
    }

    pub fn contains(&self, nodes: &[NodeId]) -> bool {
        self.prefix(nodes).is_some_and(|t| self.trie[t].children.is_empty())
    }

    fn prefix(&self, nodes: &[NodeId]) -> Option<usize> {
        let mut cur = 0;
        for y in nodes {
            cur = *self.trie[cur].children.get(y)?;
        }
        Some(cur)
    }

    /// First path that agrees with path `j` on positions `0..=i` and passes
    /// through `s` at position `i + 1`.
    pub fn sibling(&self, j: usize, i: usize, s: NodeId) -> Option<usize> {
        let t = self.at[j][i];
        self.trie[t].children.get(&s).map(|&c| self.trie[c].first)
    }

    /// First path through `x` at position 1.
    pub fn through_root_premise(&self, x: NodeId) -> Option<usize> {
        let root = *self.trie[0].children.values().next()?;
        self.trie[root].children.get(&x).map(|&c| self.trie[c].first)
    }

    pub fn edges(&self) -> BTreeSet<Edge> {
        self.paths.iter().flat_map(|p| p.edges()).collect()
    }

    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.paths.iter().flat_map(|p| p.nodes.iter().copied()).collect()
    }

    /// Same paths with node ids renamed; paths hitting a removed node are dropped.
    pub fn remap(&self, rename: &[Option<NodeId>]) -> PathFamily {
        PathFamily::new(self.paths.iter().filter_map(|p| {
            let nodes = p.nodes.iter().map(|&y| rename[y]).collect::<Option<Vec<_>>>()?;
            Some(DagPath { nodes, origin: p.origin })
        }))
    }
}

#[derive(Clone, Debug)]
pub struct Compression {
    /// `∂*`, without `f`.
    pub dag: DagDeduction,
    pub merge: MergeMap,
    /// `F*`: images of the tree's deductive paths.
    pub paths: PathFamily,
}

/// Merges, level by level, all tree nodes that carry the same label.
pub fn compress(d: &TreeDeduction) -> Result<Compression> {
    if d.len() < 2 {
        return Err(Error::Invalid("a single assumption proves nothing".into()));
    }
    let report = tree::check_tree(d);
    if !report.locally_correct {
        let first = &report.violations[0];
        return Err(Error::Invalid(format!("tree not locally correct at node {}: {}", first.node, first.reason)));
    }
    if !d.is_leveled() {
        return Err(Error::Invalid("tree is not leveled".into()));
    }
    if !tree::proves_tree(d) {
        return Err(Error::Invalid("tree does not prove its conclusion".into()));
    }
    Ok(merge_levels(d))
}

/// The merge itself, for any locally correct leveled tree.
pub(crate) fn merge_levels(d: &TreeDeduction) -> Compression {
    let depth = d.depths();
    let mut order: Vec<tree::NodeId> = (0..d.len()).collect();
    order.sort_by_key(|&x| (depth[x], x));
    let mut id: HashMap<(usize, Formula), NodeId> = HashMap::new();
    let mut tree_to_dag = vec![0; d.len()];
    let mut levels = Vec::new();
    for &x in &order {
        let key = (depth[x], d.nodes[x].label);
        let next = id.len();
        let y = *id.entry(key).or_insert(next);
        if y == next {
            levels.push(key);
        }
        tree_to_dag[x] = y;
    }

    let mut groups: Vec<BTreeSet<PremiseGroup>> = vec![BTreeSet::new(); levels.len()];
    for (x, n) in d.nodes.iter().enumerate() {
        let y = tree_to_dag[x];
        let prem: Vec<NodeId> = n.premises.iter().map(|&p| tree_to_dag[p]).collect();
        match n.rule {
            TreeRule::Assumption => {}
            TreeRule::ImpI(_) => {
                groups[y].insert(PremiseGroup::IPrem { body: prem[0] });
            }
            TreeRule::ImpE => {
                groups[y].insert(PremiseGroup::TwinPair { minor: prem[0], major: prem[1] });
            }
            TreeRule::Rep(_) => groups[y].extend(prem.into_iter().map(|body| PremiseGroup::RepPrem { body })),
        }
    }
    let nodes = levels
        .iter()
        .zip(groups)
        .map(|(&(level, label), gs)| {
            let rule = simple_rule(label, &gs);
            DagNode { label, level, rule }
        })
        .collect();
    let dag = DagDeduction { nodes, root: tree_to_dag[d.root], f: FMap::new() };
    let paths = PathFamily::new(d.paths().into_iter().map(|p| DagPath { nodes: p.iter().rev().map(|&x| tree_to_dag[x]).collect(), origin: p[0] }));
    Compression { dag, merge: MergeMap { tree_to_dag }, paths }
}

/// A single group becomes the ordinary rule; several become `Merged`.
fn simple_rule(label: Formula, gs: &BTreeSet<PremiseGroup>) -> DagRule {
    if gs.len() > 1 {
        return DagRule::Merged(gs.iter().copied().collect());
    }
    match gs.iter().next() {
        None => DagRule::Assumption,
        Some(&PremiseGroup::IPrem { body }) => DagRule::ImpI { discharged: label.as_imp().expect("introduction concludes an implication").0, body },
        Some(&PremiseGroup::TwinPair { minor, major }) => DagRule::ImpE { minor, major },
        Some(&PremiseGroup::RepPrem { body }) => DagRule::Rep { body },
    }
}

/// Siblings required for the step from `y` (position `i + 1`) into `x`
/// (position `i`): the other premise of every two-premise group holding `y`.
/// None are required if `y` alone is a premise group of `x`.
fn twin_siblings(d: &DagDeduction, x: NodeId, y: NodeId) -> Vec<NodeId> {
    if let DagRule::Merged(gs) = &d.nodes[x].rule {
        if gs.iter().any(|g| matches!(*g, PremiseGroup::IPrem { body } | PremiseGroup::RepPrem { body } if body == y)) {
            return vec![];
        }
    }
    let mut out = match &d.nodes[x].rule {
        DagRule::ImpE { minor, major } if *minor == y => vec![*major],
        DagRule::ImpE { minor, major } if *major == y => vec![*minor],
        DagRule::Merged(gs) => gs
            .iter()
            .filter_map(|g| match *g {
                PremiseGroup::TwinPair { minor, major } if minor == y => Some(major),
                PremiseGroup::TwinPair { minor, major } if major == y => Some(minor),
                _ => None,
            })
            .collect(),
        _ => vec![],
    };
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Coherency {
    /// Every path is a root-to-leaf path of the dag.
    pub well_formed: bool,
    /// Every dag node lies on some path.
    pub dense: bool,
    /// Every path discharges its leaf formula.
    pub closed: bool,
    /// Every (→E) step has its sibling premise covered with the same tail.
    pub preserves_elim: bool,
}

impl Coherency {
    pub fn ok(&self) -> bool {
        self.well_formed && self.dense && self.closed && self.preserves_elim
    }
}

fn path_closed(d: &DagDeduction, idx: &DagIndex, p: &DagPath) -> bool {
    let a = d.nodes[p.leaf()].label;
    p.edges().any(|e| idx.edge_id.get(&e).is_some_and(|&i| idx.closes[i] == Some(a)))
}

pub fn coherency(d: &DagDeduction, fam: &PathFamily) -> Coherency {
    let idx = d.index();
    let h = d.height();
    let well_formed = fam.paths().iter().all(|p| {
        p.nodes.len() == h + 1
            && p.nodes[0] == d.root
            && p.nodes.iter().all(|&y| y < d.len())
            && d.nodes[p.leaf()].rule == DagRule::Assumption
            && p.edges().all(|e| idx.edge_id.contains_key(&e))
    });
    if !well_formed {
        return Coherency { well_formed, dense: false, closed: false, preserves_elim: false };
    }
    let dense = fam.nodes().len() == d.len();
    let closed = fam.paths().iter().all(|p| path_closed(d, &idx, p));
    let preserves_elim = fam.paths().iter().enumerate().all(|(j, p)| {
        (0..h).all(|i| {
            let sib = twin_siblings(d, p.nodes[i], p.nodes[i + 1]);
            sib.is_empty() || sib.iter().any(|&s| fam.sibling(j, i, s).is_some())
        })
    });
    Coherency { well_formed, dense, closed, preserves_elim }
}

/// Local coherency 1–3.
pub fn check_coherency(d: &DagDeduction, fam: &PathFamily) -> bool {
    coherency(d, fam).ok()
}

/// Fundamental set of paths: one path per root premise, then, descending
/// from the root, a tail-matching sibling path for every (→E) step not yet
/// covered. Choices are first-in-enumeration.
pub fn build_fsp(d: &DagDeduction, star: &PathFamily) -> Result<PathFamily> {
    let mut basis = Vec::new();
    for x in d.nodes[d.root].rule.premises_ordered() {
        basis.push(star.through_root_premise(x).ok_or_else(|| Error::Inconsistent(format!("no path through root premise {x}")))?);
    }
    sibling_closure(d, star, basis)
}

/// Extends the chosen paths (indices into `star`), level by level from the
/// root, until every (→E) step has a tail-matching sibling.
pub fn sibling_closure(d: &DagDeduction, star: &PathFamily, start: Vec<usize>) -> Result<PathFamily> {
    let h = d.height();
    let mut chosen: Vec<usize> = Vec::new();
    let mut taken: HashSet<usize> = HashSet::new();
    let mut covered: HashSet<usize> = HashSet::new();
    let mut take = |j: usize, chosen: &mut Vec<usize>, covered: &mut HashSet<usize>| {
        if taken.insert(j) {
            chosen.push(j);
            covered.extend(star.at[j].iter().copied());
        }
    };
    for j in start {
        take(j, &mut chosen, &mut covered);
    }
    for i in 0..h {
        let mut k = 0;
        while k < chosen.len() {
            let j = chosen[k];
            k += 1;
            let p = &star.paths[j];
            let sib = twin_siblings(d, p.nodes[i], p.nodes[i + 1]);
            if sib.is_empty() {
                continue;
            }
            let prefix = star.at[j][i];
            let done = sib.iter().any(|s| star.trie[prefix].children.get(s).is_some_and(|c| covered.contains(c)));
            if done {
                continue;
            }
            let j2 = sib
                .iter()
                .find_map(|&s| star.sibling(j, i, s))
                .ok_or_else(|| Error::Inconsistent(format!("no sibling path for the step {} -> {} at level {i}", p.nodes[i + 1], p.nodes[i])))?;
            take(j2, &mut chosen, &mut covered);
        }
    }
    chosen.sort_unstable();
    Ok(PathFamily::new(chosen.into_iter().map(|j| star.paths[j].clone())))
}

/// Subdag on the edges of `fam`, with merged groups pruned to those whose
/// edges all survive. Returns the dag and the old-to-new node renaming.
pub fn restrict_to_fsp(d: &DagDeduction, fam: &PathFamily) -> Result<(DagDeduction, Vec<Option<NodeId>>)> {
    let edges = fam.edges();
    let keep = fam.nodes();
    if !keep.contains(&d.root) {
        return Err(Error::Invalid("path family misses the root".into()));
    }
    let mut rename = vec![None; d.len()];
    for (k, &y) in keep.iter().enumerate() {
        rename[y] = Some(k);
    }
    let r = |y: NodeId| rename[y].expect("premise on a kept edge is kept");
    let mut nodes = Vec::with_capacity(keep.len());
    for &x in &keep {
        let n = &d.nodes[x];
        let has = |y: NodeId| edges.contains(&(y, x));
        let rule = match &n.rule {
            DagRule::Assumption => DagRule::Assumption,
            DagRule::ImpI { discharged, body } => DagRule::ImpI { discharged: *discharged, body: r(*body) },
            DagRule::ImpE { minor, major } => {
                if !(has(*minor) && has(*major)) {
                    return Err(Error::Inconsistent(format!("(→E) at node {x} lost a premise")));
                }
                DagRule::ImpE { minor: r(*minor), major: r(*major) }
            }
            DagRule::Rep { body } => DagRule::Rep { body: r(*body) },
            DagRule::Merged(gs) => {
                let kept: BTreeSet<PremiseGroup> = gs
                    .iter()
                    .filter(|g| g.nodes().into_iter().all(has))
                    .map(|g| match *g {
                        PremiseGroup::TwinPair { minor, major } => PremiseGroup::TwinPair { minor: r(minor), major: r(major) },
                        PremiseGroup::IPrem { body } => PremiseGroup::IPrem { body: r(body) },
                        PremiseGroup::RepPrem { body } => PremiseGroup::RepPrem { body: r(body) },
                    })
                    .collect();
                let used: BTreeSet<NodeId> = kept.iter().flat_map(|g| g.nodes()).collect();
                if let Some(&(y, _)) = edges.iter().find(|&&(y, t)| t == x && !used.contains(&r(y))) {
                    return Err(Error::Inconsistent(format!("edge {y} -> {x} completes no premise group")));
                }
                simple_rule(n.label, &kept)
            }
        };
        nodes.push(DagNode { label: n.label, level: n.level, rule });
    }
    Ok((DagDeduction { nodes, root: r(d.root), f: FMap::new() }, rename))
}

/// `f(e, α)`: the in-edges that some path with leaf formula `α` takes right
/// before `e`, at every merged node.
pub fn extract_f(d: &DagDeduction, fam: &PathFamily) -> FMap {
    let mut f = FMap::new();
    for p in fam.paths() {
        let a = d.nodes[p.leaf()].label;
        let n = &p.nodes;
        for i in 1..n.len().saturating_sub(1) {
            if d.nodes[n[i]].rule.is_merged() {
                f.entry(((n[i], n[i - 1]), a)).or_default().insert((n[i + 1], n[i]));
            }
        }
    }
    f
}

#[derive(Clone, Debug, Serialize)]
pub struct CompressionMetrics {
    pub h_tree: usize,
    pub h_dag: usize,
    pub phi: u64,
    pub w_tree: u64,
    /// Weight of the full compression `∂*`.
    pub w_star: u64,
    /// Weight of the certified (pruned) dag.
    pub w_dag: u64,
    pub nodes_tree: usize,
    pub nodes_dag: usize,
    pub merged_nodes: usize,
    pub fsp_size: usize,
    pub star_paths: usize,
    /// `h(∂*) ≤ 2·h(∂)` and `weight(∂*) ≤ h(∂*)·φ²`.
    pub bound_ok: bool,
}

#[derive(Clone, Debug)]
pub struct Certified {
    pub dag: DagDeduction,
    pub star: DagDeduction,
    pub metrics: CompressionMetrics,
    pub verified: bool,
}

pub fn compress_and_certify(d: &TreeDeduction) -> Result<Certified> {
    if !tree::proves_tree(d) {
        return Err(Error::Invalid("tree does not prove its conclusion".into()));
    }
    let leveled = tree::level_tree(d);
    let c = compress(&leveled).map_err(Error::at("compress"))?;
    let fsp = build_fsp(&c.dag, &c.paths).map_err(Error::at("build_fsp"))?;
    let (mut flat, rename) = restrict_to_fsp(&c.dag, &fsp).map_err(Error::at("restrict"))?;
    let fsp = fsp.remap(&rename);
    flat.f = extract_f(&flat, &fsp);
    let verified = dag::verify_dag(&flat).map_err(Error::at("verify"))?;

    let h_tree = d.height();
    let h_dag = c.dag.height();
    let phi = d.phi();
    let w_star = c.dag.weight();
    let bound_ok = h_dag <= 2 * h_tree && w_star <= h_dag as u64 * phi * phi;
    let metrics = CompressionMetrics {
        h_tree,
        h_dag,
        phi,
        w_tree: d.weight(),
        w_star,
        w_dag: flat.weight(),
        nodes_tree: leveled.len(),
        nodes_dag: flat.len(),
        merged_nodes: flat.nodes.iter().filter(|n| n.rule.is_merged()).count(),
        fsp_size: fsp.len(),
        star_paths: c.paths.len(),
        bound_ok,
    };
    Ok(Certified { dag: flat, star: c.dag, metrics, verified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeBuilder;

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    /// Discharges every leaf formula, innermost first in label order.
    fn close_all(mut b: TreeBuilder, root: tree::NodeId, leaves: &[&str]) -> TreeDeduction {
        let mut r = root;
        for l in leaves {
            r = b.imp_i(f(l), r);
        }
        b.finish(r)
    }

    /// `q` derived at the same level by two different (→E) inferences.
    fn twin_merge() -> TreeDeduction {
        let mut b = TreeBuilder::new();
        let (p, pq) = (b.assume(f("p")), b.assume(f("p->q")));
        let q1 = b.imp_e(p, pq);
        let (t, tq) = (b.assume(f("t")), b.assume(f("t->q")));
        let q2 = b.imp_e(t, tq);
        let m2 = b.assume(f("q->(r->q)->s"));
        let a = b.imp_i(f("r"), q1);
        let bb = b.imp_e(q2, m2);
        let s = b.imp_e(a, bb);
        close_all(b, s, &["p", "p->q", "t", "t->q", "q->(r->q)->s"])
    }

    /// `r→q` derived at the same level by (→I) and by (→E).
    fn intro_elim_merge() -> TreeDeduction {
        let mut b = TreeBuilder::new();
        let (p, pq) = (b.assume(f("p")), b.assume(f("p->q")));
        let q = b.imp_e(p, pq);
        let z1 = b.imp_i(f("r"), q);
        let (t, trq) = (b.assume(f("t")), b.assume(f("t->r->q")));
        let z2 = b.imp_e(t, trq);
        let w = b.assume(f("(r->q)->(r->q)->s"));
        let m = b.rep(vec![z1]);
        let mm = b.imp_e(z2, w);
        let s = b.imp_e(m, mm);
        close_all(b, s, &["p", "p->q", "t", "t->r->q", "(r->q)->(r->q)->s"])
    }

    fn identity() -> TreeDeduction {
        let mut b = TreeBuilder::new();
        let p = b.assume(f("p"));
        let r = b.imp_i(f("p"), p);
        b.finish(r)
    }

    #[test]
    fn identity_compresses_to_two_nodes() {
        let c = compress_and_certify(&identity()).unwrap();
        assert!(c.verified);
        assert_eq!(c.dag.len(), 2);
        assert!(c.metrics.bound_ok);
    }

    #[test]
    fn single_assumption_is_rejected() {
        let mut b = TreeBuilder::new();
        let p = b.assume(f("p"));
        assert!(compress(&b.finish(p)).is_err());
    }

    #[test]
    fn unleveled_or_open_input_is_rejected() {
        assert!(compress(&twin_merge()).is_err());
        let mut b = TreeBuilder::new();
        let p = b.assume(f("p"));
        let r = b.imp_i(f("q"), p);
        assert!(compress(&b.finish(r)).is_err());
    }

    #[test]
    fn twin_pairs_merge() {
        let t = tree::level_tree(&twin_merge());
        let c = compress(&t).unwrap();
        let merged: Vec<&DagNode> = c.dag.nodes.iter().filter(|n| n.rule.is_merged()).collect();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].label, f("q"));
        match &merged[0].rule {
            DagRule::Merged(gs) => {
                assert_eq!(gs.len(), 2);
                assert!(gs.iter().all(|g| matches!(g, PremiseGroup::TwinPair { .. })));
            }
            _ => unreachable!(),
        }
        assert!(check_coherency(&c.dag, &c.paths));
        assert!(dag::check_dag(&c.dag).correct);
        let cert = compress_and_certify(&twin_merge()).unwrap();
        assert!(cert.verified);
        assert!(cert.metrics.bound_ok);
        assert!(dag::verify_by_threads(&cert.dag).unwrap());
    }

    #[test]
    fn intro_and_elim_merge() {
        let t = tree::level_tree(&intro_elim_merge());
        let c = compress(&t).unwrap();
        let gs = c
            .dag
            .nodes
            .iter()
            .find_map(|n| match &n.rule {
                DagRule::Merged(gs) => Some(gs.clone()),
                _ => None,
            })
            .expect("one merged node");
        assert!(gs.iter().any(|g| matches!(g, PremiseGroup::IPrem { .. })));
        assert!(gs.iter().any(|g| matches!(g, PremiseGroup::TwinPair { .. })));
        let cert = compress_and_certify(&intro_elim_merge()).unwrap();
        assert!(cert.verified);
        let back = dag::unfold_dag(&cert.dag).unwrap();
        assert!(tree::proves_tree(&back));
        assert_eq!(back.conclusion(), intro_elim_merge().conclusion());
    }

    #[test]
    fn coherency_detects_missing_paths() {
        let t = tree::level_tree(&twin_merge());
        let c = compress(&t).unwrap();
        // drop every path through the leaf `t`
        let leaf_t = c.dag.nodes.iter().position(|n| n.label == f("t") && n.rule == DagRule::Assumption).unwrap();
        let fewer = PathFamily::new(c.paths.paths().iter().filter(|p| p.leaf() != leaf_t).cloned());
        let r = coherency(&c.dag, &fewer);
        assert!(!r.dense);
        assert!(!r.preserves_elim);
        assert!(r.closed);
    }

    #[test]
    fn linear_dag_fsp_is_everything() {
        let t = tree::level_tree(&identity());
        let c = compress(&t).unwrap();
        let fsp = build_fsp(&c.dag, &c.paths).unwrap();
        assert_eq!(fsp.len(), c.paths.len());
        assert!(extract_f(&c.dag, &fsp).is_empty());
    }

    #[test]
    fn root_elim_basis_has_two_paths() {
        let t = tree::level_tree(&twin_merge());
        let c = compress(&t).unwrap();
        let fsp = build_fsp(&c.dag, &c.paths).unwrap();
        assert!(fsp.len() <= c.paths.len());
        assert!(check_coherency(&restrict_to_fsp(&c.dag, &fsp).unwrap().0, &fsp.remap(&restrict_to_fsp(&c.dag, &fsp).unwrap().1)));
    }
}
