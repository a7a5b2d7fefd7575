use implog::compress;
use implog::dot;
use implog::tree::{TreeBuilder, TreeDeduction};
use implog::Formula;

fn f(s: &str) -> Formula {
    Formula::parse(s).unwrap()
}

/// `q` is derived at the same level by two eliminations, so compression
/// merges them into one node with two twin-premise groups.
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
fn merged_dag_golden() {
    let c = compress::compress_and_certify(&twin_merge()).unwrap();
    assert!(c.verified);
    let text = dot::dag_to_dot(&c.dag);
    let golden = include_str!("data/twin_merge.dot");
    assert_eq!(text, golden, "regenerate data/twin_merge.dot if the layout changed on purpose");
}

#[test]
fn twin_edges_share_a_group() {
    let c = compress::compress_and_certify(&twin_merge()).unwrap();
    let text = dot::dag_to_dot(&c.dag);
    for g in ["g0", "g1"] {
        assert!(text.contains(&format!("{g}:minor")), "{text}");
        assert!(text.contains(&format!("{g}:major")), "{text}");
    }
    assert!(text.contains("style=bold"));
    assert_eq!(text, dot::dag_to_dot(&c.dag));
}

#[test]
fn identity_tree_has_one_edge() {
    let mut b = TreeBuilder::new();
    let p = b.assume(f("p"));
    let r = b.imp_i(f("p"), p);
    let t = b.finish(r);
    let text = dot::tree_to_dot(&t);
    assert_eq!(text.matches(" -> ").count(), 1);
    assert!(text.contains("n0 [label=") && text.contains("n1 [label=") && !text.contains("n2"));
}
