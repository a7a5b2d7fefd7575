//! Graphviz export. Output depends only on the deduction, so equal inputs
//! give byte-identical text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::dag::{DagDeduction, DagRule, Edge, PremiseGroup};
use crate::tree::{TreeDeduction, TreeRule};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One rank per depth; edges point from premise to conclusion.
pub fn tree_to_dot(t: &TreeDeduction) -> String {
    let depth = t.depths();
    let mut out = String::from("digraph tree {\n  rankdir=BT;\n  node [shape=plaintext];\n");
    for (x, n) in t.nodes.iter().enumerate() {
        let rule = match &n.rule {
            TreeRule::Assumption => String::new(),
            TreeRule::ImpI(a) => format!(" [→I {a}]"),
            TreeRule::ImpE => " [→E]".into(),
            TreeRule::Rep(k) => format!(" [R{k}]"),
        };
        writeln!(out, "  n{x} [label=\"{}{}\"];", escape(&n.label.to_string()), escape(&rule)).unwrap();
    }
    let mut ranks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (x, &d) in depth.iter().enumerate() {
        ranks.entry(d).or_default().push(x);
    }
    for xs in ranks.values() {
        let ids: Vec<String> = xs.iter().map(|x| format!("n{x}")).collect();
        writeln!(out, "  {{ rank=same; {}; }}", ids.join("; ")).unwrap();
    }
    for (x, n) in t.nodes.iter().enumerate() {
        for (k, &p) in n.premises.iter().enumerate() {
            let tag = match (&n.rule, k) {
                (TreeRule::ImpE, 0) => " [label=\"minor\"]",
                (TreeRule::ImpE, _) => " [label=\"major\"]",
                _ => "",
            };
            writeln!(out, "  n{p} -> n{x}{tag};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// One rank per level. Edges of a merged node carry their premise-group
/// tags (`g0`, `g1`, …); edges selected by `f` are bold, with the
/// assumptions they are selected for listed.
pub fn dag_to_dot(d: &DagDeduction) -> String {
    let mut out = String::from("digraph dag {\n  rankdir=BT;\n  node [shape=plaintext];\n");
    for (x, n) in d.nodes.iter().enumerate() {
        let rule = match &n.rule {
            DagRule::Assumption => String::new(),
            DagRule::ImpI { discharged, .. } => format!(" [→I {discharged}]"),
            DagRule::ImpE { .. } => " [→E]".into(),
            DagRule::Rep { .. } => " [R]".into(),
            DagRule::Merged(gs) => format!(" [merged ×{}]", gs.len()),
        };
        writeln!(out, "  n{x} [label=\"{}{}\"];", escape(&n.label.to_string()), escape(&rule)).unwrap();
    }
    let mut ranks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (x, n) in d.nodes.iter().enumerate() {
        ranks.entry(n.level).or_default().push(x);
    }
    for xs in ranks.values() {
        let ids: Vec<String> = xs.iter().map(|x| format!("n{x}")).collect();
        writeln!(out, "  {{ rank=same; {}; }}", ids.join("; ")).unwrap();
    }
    let mut selected: BTreeMap<Edge, BTreeSet<String>> = BTreeMap::new();
    for ((_, a), sel) in &d.f {
        for e in sel {
            selected.entry(*e).or_default().insert(a.to_string());
        }
    }
    for &(s, t) in &d.index().edges {
        let mut attrs = Vec::new();
        match &d.nodes[t].rule {
            DagRule::ImpE { minor, .. } => attrs.push(format!("label=\"{}\"", if *minor == s { "minor" } else { "major" })),
            DagRule::Merged(gs) => {
                let tags: Vec<String> = gs
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g.nodes().contains(&s))
                    .map(|(k, g)| match g {
                        PremiseGroup::TwinPair { minor, .. } => format!("g{k}:{}", if *minor == s { "minor" } else { "major" }),
                        PremiseGroup::IPrem { .. } => format!("g{k}:intro"),
                        PremiseGroup::RepPrem { .. } => format!("g{k}:rep"),
                    })
                    .collect();
                attrs.push(format!("label=\"{}\"", tags.join(",")));
            }
            _ => {}
        }
        if let Some(fs) = selected.get(&(s, t)) {
            attrs.push("style=bold".into());
            attrs.push("color=blue".into());
            attrs.push(format!("xlabel=\"f: {}\"", escape(&fs.iter().cloned().collect::<Vec<_>>().join(", "))));
        }
        if attrs.is_empty() {
            writeln!(out, "  n{s} -> n{t};").unwrap();
        } else {
            writeln!(out, "  n{s} -> n{t} [{}];", attrs.join(", ")).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;
    use crate::tree::TreeBuilder;

    #[test]
    fn identity_tree() {
        let mut b = TreeBuilder::new();
        let p = b.assume(Formula::var("p"));
        let r = b.imp_i(Formula::var("p"), p);
        let t = b.finish(r);
        let dot = tree_to_dot(&t);
        assert_eq!(dot.matches(" -> ").count(), 1);
        assert_eq!(dot.matches("[label=").count(), 2);
        assert_eq!(dot, tree_to_dot(&t));
    }
}
