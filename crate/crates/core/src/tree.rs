//! Tree-like natural deduction with `(→I)`, `(→E)` and repetition rules.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Formula;

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreeRule {
    Assumption,
    /// `β / α→β`, discharging `α` (possibly vacuously).
    ImpI(Formula),
    /// Premises `[minor α, major α→β]`, conclusion `β`.
    ImpE,
    /// `n` identical premises.
    Rep(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub label: Formula,
    pub rule: TreeRule,
    pub premises: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDeduction {
    pub nodes: Vec<TreeNode>,
    pub root: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: NodeId,
    pub reason: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TreeReport {
    pub locally_correct: bool,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TreeMetrics {
    pub h: usize,
    pub phi: u64,
    pub w: u64,
    pub normal: bool,
    pub weak_subformula: bool,
}

/// Incremental construction of a tree deduction, premises before conclusions.
#[derive(Default)]
pub struct TreeBuilder {
    nodes: Vec<TreeNode>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, label: Formula, rule: TreeRule, premises: Vec<NodeId>) -> NodeId {
        self.nodes.push(TreeNode { label, rule, premises });
        self.nodes.len() - 1
    }

    pub fn label(&self, id: NodeId) -> Formula {
        self.nodes[id].label
    }

    pub fn assume(&mut self, label: Formula) -> NodeId {
        self.push(label, TreeRule::Assumption, vec![])
    }

    pub fn imp_i(&mut self, discharged: Formula, body: NodeId) -> NodeId {
        let label = Formula::imp(discharged, self.nodes[body].label);
        self.push(label, TreeRule::ImpI(discharged), vec![body])
    }

    /// Panics if the major premise is not `minor → β`.
    pub fn imp_e(&mut self, minor: NodeId, major: NodeId) -> NodeId {
        let (a, b) = self.nodes[major].label.as_imp().expect("major premise must be an implication");
        assert_eq!(a, self.nodes[minor].label, "major premise does not match minor");
        self.push(b, TreeRule::ImpE, vec![minor, major])
    }

    pub fn rep(&mut self, premises: Vec<NodeId>) -> NodeId {
        let label = self.nodes[premises[0]].label;
        self.push(label, TreeRule::Rep(premises.len()), premises)
    }

    /// Raw node; no schema check.
    pub fn raw(&mut self, label: Formula, rule: TreeRule, premises: Vec<NodeId>) -> NodeId {
        self.push(label, rule, premises)
    }

    pub fn finish(self, root: NodeId) -> TreeDeduction {
        TreeDeduction { nodes: self.nodes, root }
    }
}

/// Multiset of formulas discharged on the current root-to-node path.
#[derive(Default)]
struct Discharges(HashMap<Formula, usize>);

impl Discharges {
    fn push(&mut self, rule: &TreeRule) {
        if let TreeRule::ImpI(a) = rule {
            *self.0.entry(*a).or_default() += 1;
        }
    }
    fn pop(&mut self, rule: &TreeRule) {
        if let TreeRule::ImpI(a) = rule {
            let c = self.0.get_mut(a).expect("balanced push/pop");
            *c -= 1;
            if *c == 0 {
                self.0.remove(a);
            }
        }
    }
    fn contains(&self, f: Formula) -> bool {
        self.0.contains_key(&f)
    }
}

impl TreeDeduction {
    pub fn conclusion(&self) -> Formula {
        self.nodes[self.root].label
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_leaf(&self, x: NodeId) -> bool {
        self.nodes[x].premises.is_empty()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&x| self.is_leaf(x)).collect()
    }

    /// Distance from the root, per node. Assumes tree shape.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            for &c in &self.nodes[x].premises {
                depth[c] = depth[x] + 1;
                stack.push(c);
            }
        }
        depth
    }

    /// Parent of each node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        for (x, n) in self.nodes.iter().enumerate() {
            for &c in &n.premises {
                parent[c] = Some(x);
            }
        }
        parent
    }

    /// Edges on the longest leaf-to-root path.
    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    pub fn is_leveled(&self) -> bool {
        let depth = self.depths();
        let h = self.height();
        self.leaves().into_iter().all(|x| depth[x] == h)
    }

    /// Every deductive path `[x₀,…,x_h=r]`, leaf first, in leaf-id order.
    pub fn paths(&self) -> Vec<Vec<NodeId>> {
        let parent = self.parents();
        self.leaves()
            .into_iter()
            .map(|leaf| {
                let mut p = vec![leaf];
                let mut x = leaf;
                while let Some(y) = parent[x] {
                    p.push(y);
                    x = y;
                }
                p
            })
            .collect()
    }

    /// Sum of label weights plus number of edges.
    pub fn weight(&self) -> u64 {
        let labels: u64 = self.nodes.iter().map(|n| n.label.weight()).sum();
        let edges: usize = self.nodes.iter().map(|n| n.premises.len()).sum();
        labels + edges as u64
    }

    pub fn distinct_labels(&self) -> BTreeSet<Formula> {
        self.nodes.iter().map(|n| n.label).collect()
    }

    /// Total weight of the distinct formulas occurring in the deduction.
    pub fn phi(&self) -> u64 {
        self.distinct_labels().into_iter().map(Formula::weight).sum()
    }

    pub fn check(&self) -> TreeReport {
        check_tree(self)
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| TreeNodeJson { id, label: n.label, rule: RuleJson::from_rule(&n.rule), premises: n.premises.clone() })
                .collect(),
            root: self.root,
        }
    }

    pub fn from_json(j: &TreeJson) -> Result<TreeDeduction> {
        let mut index = HashMap::new();
        for (i, n) in j.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::Invalid(format!("duplicate node id {}", n.id)));
            }
        }
        let lookup = |id: usize| index.get(&id).copied().ok_or_else(|| Error::Invalid(format!("unknown node id {id}")));
        let mut nodes = Vec::with_capacity(j.nodes.len());
        for n in &j.nodes {
            let premises = n.premises.iter().map(|&p| lookup(p)).collect::<Result<Vec<_>>>()?;
            let rule = n.rule.to_rule(premises.len())?;
            nodes.push(TreeNode { label: n.label, rule, premises });
        }
        Ok(TreeDeduction { nodes, root: lookup(j.root)? })
    }
}

/// Wire format: `{"nodes":[{"id","label","rule":{"tag","discharge"?},"premises"}],"root"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeJson {
    pub nodes: Vec<TreeNodeJson>,
    pub root: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeNodeJson {
    pub id: usize,
    pub label: Formula,
    pub rule: RuleJson,
    #[serde(default)]
    pub premises: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuleJson {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discharge: Option<Formula>,
}

impl RuleJson {
    pub fn from_rule(rule: &TreeRule) -> RuleJson {
        let (tag, discharge) = match rule {
            TreeRule::Assumption => ("Assumption", None),
            TreeRule::ImpI(a) => ("ImpI", Some(*a)),
            TreeRule::ImpE => ("ImpE", None),
            TreeRule::Rep(_) => ("Rep", None),
        };
        RuleJson { tag: tag.to_string(), discharge }
    }

    pub fn to_rule(&self, arity: usize) -> Result<TreeRule> {
        Ok(match self.tag.as_str() {
            "Assumption" => TreeRule::Assumption,
            "ImpI" => TreeRule::ImpI(self.discharge.ok_or_else(|| Error::Invalid("ImpI without discharge".into()))?),
            "ImpE" => TreeRule::ImpE,
            "Rep" => TreeRule::Rep(arity),
            other => return Err(Error::Invalid(format!("unknown rule tag {other:?}"))),
        })
    }
}

/// Local correctness: tree shape plus every rule schema.
fn bad(v: &mut Vec<Violation>, node: NodeId, reason: String) {
    v.push(Violation { node, reason });
}

pub fn check_tree(d: &TreeDeduction) -> TreeReport {
    let mut violations = Vec::new();
    let n = d.nodes.len();
    if d.root >= n {
        bad(&mut violations, d.root, "root out of range".into());
        return TreeReport { locally_correct: false, violations };
    }
    let mut parent_count = vec![0usize; n];
    for (x, node) in d.nodes.iter().enumerate() {
        for &c in &node.premises {
            if c >= n {
                bad(&mut violations, x, format!("premise {c} out of range"));
            } else {
                parent_count[c] += 1;
            }
        }
    }
    if parent_count[d.root] != 0 {
        bad(&mut violations, d.root, "root has a conclusion below it".into());
    }
    for (x, &pc) in parent_count.iter().enumerate() {
        if pc > 1 {
            bad(&mut violations, x, format!("node is a premise of {pc} inferences"));
        }
    }
    if !violations.is_empty() {
        return TreeReport { locally_correct: false, violations };
    }
    // Reachability from the root; with in-degree ≤ 1 this also rules out cycles.
    let mut seen = vec![false; n];
    let mut stack = vec![d.root];
    while let Some(x) = stack.pop() {
        if std::mem::replace(&mut seen[x], true) {
            continue;
        }
        stack.extend(d.nodes[x].premises.iter().copied());
    }
    for (x, &s) in seen.iter().enumerate() {
        if !s {
            bad(&mut violations, x, "node not connected to the root".into());
        }
    }
    for (x, node) in d.nodes.iter().enumerate() {
        let labels: Vec<Formula> = node.premises.iter().filter(|&&c| c < n).map(|&c| d.nodes[c].label).collect();
        match &node.rule {
            TreeRule::Assumption => {
                if !labels.is_empty() {
                    bad(&mut violations, x, "assumption with premises".into());
                }
            }
            TreeRule::ImpI(a) => {
                if labels.len() != 1 {
                    bad(&mut violations, x, format!("ImpI needs 1 premise, has {}", labels.len()));
                } else {
                    match node.label.as_imp() {
                        Some((ante, cons)) if ante == *a => {
                            if cons != labels[0] {
                                bad(&mut violations, x, "premise differs from the consequent".into());
                            }
                        }
                        _ => bad(&mut violations, x, format!("label not an implication with antecedent {a}")),
                    }
                }
            }
            TreeRule::ImpE => {
                if labels.len() != 2 {
                    bad(&mut violations, x, format!("ImpE needs 2 premises, has {}", labels.len()));
                } else if Formula::imp(labels[0], node.label) != labels[1] {
                    bad(&mut violations, x, "major premise mismatch".into());
                }
            }
            TreeRule::Rep(k) => {
                if *k == 0 || labels.len() != *k {
                    bad(&mut violations, x, format!("Rep({k}) has {} premises", labels.len()));
                } else if labels.iter().any(|&l| l != node.label) {
                    bad(&mut violations, x, "repetition premise differs from conclusion".into());
                }
            }
        }
    }
    TreeReport { locally_correct: violations.is_empty(), violations }
}

impl TreeDeduction {
    /// Closure status of every leaf's deductive path, in leaf-id order.
    pub fn leaf_closure(&self) -> Vec<(NodeId, bool)> {
        let mut out = Vec::new();
        let mut disch = Discharges::default();
        // (node, entering?)
        let mut stack = vec![(self.root, true)];
        while let Some((x, enter)) = stack.pop() {
            let node = &self.nodes[x];
            if !enter {
                disch.pop(&node.rule);
                continue;
            }
            if node.premises.is_empty() {
                out.push((x, disch.contains(node.label)));
                continue;
            }
            disch.push(&node.rule);
            stack.push((x, false));
            for &c in node.premises.iter().rev() {
                stack.push((c, true));
            }
        }
        out.sort_unstable();
        out
    }
}

/// Every deductive path contains an `(→I)` discharging its top formula.
pub fn proves_tree(d: &TreeDeduction) -> bool {
    d.leaf_closure().into_iter().all(|(_, closed)| closed)
}

/// Pads short branches with `Rep(1)` chains directly below their leaves.
pub fn level_tree(d: &TreeDeduction) -> TreeDeduction {
    let depth = d.depths();
    let h = depth.iter().copied().max().unwrap_or(0);
    let mut nodes = d.nodes.clone();
    for x in 0..d.nodes.len() {
        let node = &d.nodes[x];
        let mut new_premises = node.premises.clone();
        for slot in new_premises.iter_mut() {
            let leaf = *slot;
            if !d.is_leaf(leaf) || depth[leaf] == h {
                continue;
            }
            let mut below = leaf;
            for _ in depth[leaf]..h {
                nodes.push(TreeNode { label: d.nodes[leaf].label, rule: TreeRule::Rep(1), premises: vec![below] });
                below = nodes.len() - 1;
            }
            *slot = below;
        }
        nodes[x].premises = new_premises;
    }
    TreeDeduction { nodes, root: d.root }
}

/// Whether the subtree at `x` is closed under the disjunctive reading of
/// `Rep(n)` (one closed premise suffices), given discharges below `x`.
fn closes(d: &TreeDeduction, x: NodeId, disch: &mut Discharges) -> bool {
    let node = &d.nodes[x];
    if node.premises.is_empty() {
        return disch.contains(node.label);
    }
    disch.push(&node.rule);
    let ok = match node.rule {
        TreeRule::Rep(_) => node.premises.iter().any(|&c| closes(d, c, disch)),
        _ => node.premises.iter().all(|&c| closes(d, c, disch)),
    };
    disch.pop(&node.rule);
    ok
}

/// Removes all repetition inferences, keeping for each `Rep(n)` the leftmost
/// premise subtree that closes.
pub fn eliminate_repetitions(d: &TreeDeduction) -> Result<TreeDeduction> {
    fn go(d: &TreeDeduction, x: NodeId, disch: &mut Discharges, out: &mut TreeBuilder) -> Result<NodeId> {
        let node = &d.nodes[x];
        match node.rule {
            TreeRule::Assumption => Ok(out.assume(node.label)),
            TreeRule::Rep(_) => {
                let pick = node
                    .premises
                    .iter()
                    .copied()
                    .find(|&c| closes(d, c, disch))
                    .ok_or_else(|| Error::Inconsistent(format!("no premise of Rep node {x} closes")))?;
                go(d, pick, disch, out)
            }
            TreeRule::ImpI(a) => {
                disch.push(&node.rule);
                let body = go(d, node.premises[0], disch, out);
                disch.pop(&node.rule);
                Ok(out.imp_i(a, body?))
            }
            TreeRule::ImpE => {
                let minor = go(d, node.premises[0], disch, out)?;
                let major = go(d, node.premises[1], disch, out)?;
                Ok(out.raw(node.label, TreeRule::ImpE, vec![minor, major]))
            }
        }
    }
    let mut disch = Discharges::default();
    if !closes(d, d.root, &mut disch) {
        return Err(Error::Invalid("deduction does not prove its conclusion".into()));
    }
    let mut out = TreeBuilder::new();
    let root = go(d, d.root, &mut disch, &mut out)?;
    Ok(out.finish(root))
}

pub fn tree_metrics(d: &TreeDeduction) -> TreeMetrics {
    let parent = d.parents();
    let normal = !d
        .nodes
        .iter()
        .enumerate()
        .any(|(x, n)| matches!(n.rule, TreeRule::ImpI(_)) && parent[x].is_some_and(|y| d.nodes[y].rule == TreeRule::ImpE && d.nodes[y].premises[1] == x));
    let mut allowed = d.conclusion().subformulas();
    for (leaf, closed) in d.leaf_closure() {
        if closed {
            allowed.extend(d.nodes[leaf].label.subformulas());
        }
    }
    let weak_subformula = d.nodes.iter().all(|n| allowed.contains(&n.label));
    TreeMetrics { h: d.height(), phi: d.phi(), w: d.weight(), normal, weak_subformula }
}
