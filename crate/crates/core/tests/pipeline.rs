use std::collections::BTreeSet;

use implog::compress;
use implog::dag::{self, DagRule};
use implog::lm;
use implog::tree::{self, TreeBuilder, TreeDeduction};
use implog::Formula;

fn f(s: &str) -> Formula {
    Formula::parse(s).unwrap()
}

fn twin_merge() -> TreeDeduction {
    let mut b = TreeBuilder::new();
    let (p, pq) = (b.assume(f("p")), b.assume(f("p->q")));
    let q1 = b.imp_e(p, pq);
    let (t, tq) = (b.assume(f("t")), b.assume(f("t->q")));
    let q2 = b.imp_e(t, tq);
    let m2 = b.assume(f("q->(r->q)->s"));
    let a = b.imp_i(f("r"), q1);
    let bb = b.imp_e(q2, m2);
    let mut r = b.imp_e(a, bb);
    for l in ["p", "p->q", "t", "t->q", "q->(r->q)->s"] {
        r = b.imp_i(f(l), r);
    }
    b.finish(r)
}

#[test]
fn threads_follow_the_selection_at_merged_nodes() {
    let c = compress::compress_and_certify(&twin_merge()).unwrap();
    let d = &c.dag;
    let m = d.nodes.iter().position(|n| n.rule.is_merged()).expect("one merged node");
    let DagRule::Merged(groups) = &d.nodes[m].rule else { unreachable!() };
    assert_eq!(groups.len(), 2);
    let threads = dag::enumerate_f_threads(d).unwrap();
    assert!(threads.iter().all(|(_, closed)| *closed));
    for (nodes, _) in &threads {
        // nodes run leaf first
        let Some(k) = nodes.iter().position(|&x| x == m) else { continue };
        let (prev, next) = (nodes[k - 1], nodes[k + 1]);
        let leaf = d.nodes[nodes[0]].label;
        let sel = &d.f[&((m, next), leaf)];
        assert!(sel.contains(&(prev, m)), "thread from {leaf} left its group");
        let group = groups.iter().position(|g| g.nodes().contains(&prev)).unwrap();
        let expected: BTreeSet<Formula> = groups[group].nodes().iter().map(|&y| d.nodes[y].label).collect();
        assert!(expected.contains(&leaf));
    }
}

#[test]
fn distinct_leaves_get_disjoint_entries() {
    let c = compress::compress_and_certify(&twin_merge()).unwrap();
    let d = &c.dag;
    let m = d.nodes.iter().position(|n| n.rule.is_merged()).unwrap();
    let entries: Vec<_> = d.f.iter().filter(|(((s, _), _), _)| *s == m).collect();
    assert_eq!(entries.len(), 4);
    let out: BTreeSet<_> = entries.iter().map(|((e, _), _)| *e).collect();
    assert_eq!(out.len(), 2, "one out-edge per context");
    for e in out {
        let mut seen = BTreeSet::new();
        let on_e: Vec<_> = entries.iter().filter(|((x, _), _)| *x == e).collect();
        assert_eq!(on_e.len(), 2);
        for (_, sel) in on_e {
            assert_eq!(sel.len(), 1);
            assert!(seen.insert(*sel.iter().next().unwrap()));
        }
    }
}

#[test]
fn lm_derived_proof_compresses_within_bounds() {
    let goal = f("((p->q)->p)->((p->q)->q)");
    let p = lm::prove_formula(goal).unwrap().expect("valid");
    let t = lm::translate_lm_to_nd(&p).unwrap();
    assert!(tree::proves_tree(&t));
    let c = compress::compress_and_certify(&t).unwrap();
    assert!(c.verified);
    assert!(c.metrics.bound_ok);
    assert!(c.metrics.w_star <= c.metrics.h_dag as u64 * c.metrics.phi * c.metrics.phi);
    assert_eq!(c.dag.conclusion(), goal);
    let u = dag::unfold_dag(&c.dag).unwrap();
    assert!(tree::proves_tree(&u));
}

#[test]
fn changed_discharge_leaves_assumption_open() {
    let mut b = TreeBuilder::new();
    let p = b.assume(f("p"));
    let r = b.imp_i(f("q"), p);
    let t = b.finish(r);
    let d = dag::as_dag(&t).unwrap();
    let v = dag::verify_dag_report(&d).unwrap();
    assert!(!v.proves);
    assert_eq!(v.open, vec![f("p")]);
    assert!(!dag::verify_by_threads(&d).unwrap());
}
