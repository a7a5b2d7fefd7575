use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use implog::compress::{self, PathFamily};
use implog::dag::{self, DagRule};
use implog::encode;
use implog::gen;
use implog::lm::{self, LmConfig};
use implog::tree::{self, TreeBuilder, TreeDeduction, TreeRule};
use implog::{Formula, Sequent, Shape};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 256, ..ProptestConfig::default() }
}

fn tree_proof(seed: u64, max_weight: u64) -> TreeDeduction {
    gen::random_tree_proof(&mut gen::rng(seed), max_weight).expect("generator")
}

fn copy_into(t: &TreeDeduction, x: usize, b: &mut TreeBuilder) -> usize {
    let n = &t.nodes[x];
    let prem: Vec<usize> = n.premises.iter().map(|&c| copy_into(t, c, b)).collect();
    b.raw(n.label, n.rule.clone(), prem)
}

/// Decides implicational intuitionistic (= minimal) validity with the
/// contraction-free calculus: right implication is invertible, `p, p→B`
/// reduces to `p, B`, and `(C→D)→B` on the left splits into
/// `D→B ⇒ C→D` and `B ⇒ G`.
fn ljt(gamma: &[Formula], goal: Formula, memo: &mut BTreeMap<(Vec<Formula>, Formula), bool>) -> bool {
    let mut g: Vec<Formula> = gamma.to_vec();
    g.sort();
    let key = (g.clone(), goal);
    if let Some(&r) = memo.get(&key) {
        return r;
    }
    let r = ljt_step(&g, goal, memo);
    memo.insert(key, r);
    r
}

fn ljt_step(g: &[Formula], goal: Formula, memo: &mut BTreeMap<(Vec<Formula>, Formula), bool>) -> bool {
    if let Shape::Imp(a, b) = goal.shape() {
        let mut h = g.to_vec();
        h.push(a);
        return ljt(&h, b, memo);
    }
    if g.contains(&goal) {
        return true;
    }
    for (i, &f) in g.iter().enumerate() {
        let Shape::Imp(a, b) = f.shape() else { continue };
        let rest: Vec<Formula> = g.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
        match a.shape() {
            Shape::Atom(_) => {
                if rest.contains(&a) {
                    let mut h = rest.clone();
                    h.push(b);
                    // invertible
                    return ljt(&h, goal, memo);
                }
            }
            Shape::Imp(_, d) => {
                let mut left = rest.clone();
                left.push(Formula::imp(d, b));
                if ljt(&left, a, memo) {
                    let mut right = rest;
                    right.push(b);
                    if ljt(&right, goal, memo) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn valid(f: Formula) -> bool {
    ljt(&[], f, &mut BTreeMap::new())
}

#[test]
fn ljt_oracle_known_answers() {
    for s in ["p->p", "p->q->p", "(p->q->r)->(p->q)->p->r", "((p->q)->q)->(p->q)->q", "(((p->q)->p)->p)->q->q"] {
        assert!(valid(Formula::parse(s).unwrap()), "{s}");
    }
    for s in ["p", "((p->q)->p)->p", "(p->q)->p", "((p->q)->q)->p"] {
        assert!(!valid(Formula::parse(s).unwrap()), "{s}");
    }
}

#[test]
fn shared_context_counterexample_is_reported() {
    let text = include_str!("data/shared_context_tree.json");
    let j: tree::TreeJson = serde_json::from_str(text).unwrap();
    let t = TreeDeduction::from_json(&j).unwrap();
    assert!(tree::proves_tree(&t));
    let c = compress::compress_and_certify(&t).unwrap();
    // A non-merged node shared by two contexts lets a thread cross from one
    // context into the other; the selection function only constrains merged
    // nodes, so the crossing thread stays open. Both checkers agree on it.
    assert!(!c.verified);
    assert!(!dag::verify_by_threads(&c.dag).unwrap());
    let report = dag::verify_dag_report(&c.dag).unwrap();
    assert!(report.af_correct);
    assert!(!report.open.is_empty());
    assert!(c.metrics.bound_ok);
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn format_parse_identity(seed in any::<u64>(), leaves in 1usize..20) {
        let f = gen::random_formula(&mut gen::rng(seed), &gen::alphabet(), leaves);
        let g = Formula::parse(&f.to_string()).unwrap();
        prop_assert_eq!(f.id(), g.id());
        prop_assert_eq!(Formula::parse(&f.to_string()).unwrap().id(), g.id());
    }

    #[test]
    fn distinct_shapes_distinct_ids(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let a = gen::random_formula(&mut rng, &gen::alphabet(), 6);
        let b = gen::random_formula(&mut rng, &gen::alphabet(), 6);
        prop_assert_eq!(a.to_string() == b.to_string(), a == b);
    }

    #[test]
    fn weight_monotone_on_subformulas(seed in any::<u64>(), leaves in 1usize..16) {
        let f = gen::random_formula(&mut gen::rng(seed), &gen::alphabet(), leaves);
        for g in f.subformulas() {
            prop_assert!(g.weight() <= f.weight());
        }
    }

    #[test]
    fn leveling_and_repetitions_preserve_proofs(seed in any::<u64>()) {
        let t = tree_proof(seed, 24);
        prop_assert!(tree::proves_tree(&t));
        let l = tree::level_tree(&t);
        prop_assert!(l.is_leveled());
        prop_assert!(tree::proves_tree(&l));
        prop_assert_eq!(l.conclusion(), t.conclusion());
        let r = gen::sprinkle_repetitions(&mut gen::rng(seed ^ 1), &t, 0.3);
        prop_assert!(tree::proves_tree(&r));
        let e = tree::eliminate_repetitions(&r).unwrap();
        prop_assert!(tree::proves_tree(&e));
        prop_assert_eq!(e.conclusion(), t.conclusion());
        prop_assert!(e.nodes.iter().all(|n| !matches!(n.rule, TreeRule::Rep(_))));
    }

    #[test]
    fn one_path_per_leaf(seed in any::<u64>()) {
        let t = gen::sprinkle_repetitions(&mut gen::rng(seed ^ 2), &tree_proof(seed, 24), 0.2);
        let paths = t.paths();
        prop_assert_eq!(paths.len(), t.leaves().len());
        let distinct: BTreeSet<&Vec<usize>> = paths.iter().collect();
        prop_assert_eq!(distinct.len(), paths.len());
        for p in &paths {
            prop_assert!(t.is_leaf(p[0]));
            prop_assert_eq!(*p.last().unwrap(), t.root);
        }
    }

    #[test]
    fn vacuous_root_introduction_keeps_closure(seed in any::<u64>(), extra in 0usize..4) {
        let t = tree_proof(seed, 20);
        // start below the last introduction so some leaves may be open
        let body = match t.nodes[t.root].rule {
            TreeRule::ImpI(_) => t.nodes[t.root].premises[0],
            _ => t.root,
        };
        let mut b = TreeBuilder::new();
        let r = copy_into(&t, body, &mut b);
        let base = b.finish(r);
        let mut b = TreeBuilder::new();
        let r = copy_into(&t, body, &mut b);
        let v = Formula::atom(gen::alphabet()[extra]);
        let top = b.raw(Formula::imp(v, base.conclusion()), TreeRule::ImpI(v), vec![r]);
        let w = b.finish(top);
        let after: BTreeMap<_, _> = w.leaf_closure().into_iter().collect();
        for (leaf, closed) in base.leaf_closure() {
            prop_assert_eq!(w.nodes[leaf].label, base.nodes[leaf].label);
            prop_assert!(!closed || after[&leaf]);
        }
        prop_assert!(!tree::proves_tree(&base) || tree::proves_tree(&w));
    }

    #[test]
    fn empty_f_embedding(seed in any::<u64>(), strip in any::<bool>()) {
        let mut t = tree_proof(seed, 20);
        if strip {
            if let TreeRule::ImpI(_) = t.nodes[t.root].rule {
                let mut b = TreeBuilder::new();
                let r = copy_into(&t, t.nodes[t.root].premises[0], &mut b);
                t = b.finish(r);
            }
        }
        prop_assume!(matches!(t.nodes[t.root].rule, TreeRule::ImpI(_) | TreeRule::ImpE));
        let d = dag::as_dag(&t).unwrap();
        prop_assert!(d.f.is_empty());
        prop_assert!(dag::check_dag(&d).correct);
        prop_assert_eq!(dag::verify_dag(&d).unwrap(), tree::proves_tree(&t));
    }

    #[test]
    fn checker_matches_thread_oracle(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        if let Some(d) = gen::random_af_correct_dag(&mut rng, 30).unwrap() {
            prop_assert_eq!(dag::verify_dag(&d).unwrap(), dag::verify_by_threads(&d).unwrap());
            let t = dag::compute_af(&d).unwrap();
            let labels = d.assumptions();
            for &e in &d.index().edges {
                let a = t.get(e).unwrap();
                prop_assert!(a.is_subset(&labels));
                prop_assert!(a.len() as u64 <= d.weight());
            }
        }
    }

    #[test]
    fn unfolding_verified_dags(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        if let Some(d) = gen::random_af_correct_dag(&mut rng, 30).unwrap() {
            if dag::verify_dag(&d).unwrap() {
                let u = dag::unfold_dag(&d).unwrap();
                prop_assert!(tree::proves_tree(&u));
                let e = tree::eliminate_repetitions(&u).unwrap();
                prop_assert!(tree::proves_tree(&e));
                prop_assert_eq!(e.conclusion(), d.conclusion());
            }
        }
    }

    #[test]
    fn compression_properties(seed in any::<u64>()) {
        let t = tree::level_tree(&tree_proof(seed, 40));
        prop_assume!(t.len() >= 2);
        let c = compress::compress(&t).unwrap();
        prop_assert_eq!(c.dag.conclusion(), t.conclusion());
        prop_assert!(dag::check_dag(&c.dag).correct);

        // one node per label and level, bounded by the tree's labels there
        let depth = t.depths();
        let mut tree_labels: BTreeMap<usize, BTreeSet<Formula>> = BTreeMap::new();
        for (x, n) in t.nodes.iter().enumerate() {
            tree_labels.entry(depth[x]).or_default().insert(n.label);
        }
        let mut seen = BTreeSet::new();
        let mut per_level: BTreeMap<usize, usize> = BTreeMap::new();
        for n in &c.dag.nodes {
            prop_assert!(seen.insert((n.level, n.label)));
            *per_level.entry(n.level).or_default() += 1;
        }
        for (lvl, k) in per_level {
            prop_assert!(k <= tree_labels[&lvl].len());
        }

        // every tree path lands in F*, which is coherent
        for p in t.paths() {
            let mapped: Vec<usize> = p.iter().rev().map(|&x| c.merge.tree_to_dag[x]).collect();
            prop_assert!(c.paths.contains(&mapped));
        }
        prop_assert!(compress::coherency(&c.dag, &c.paths).ok());
        for (x, n) in t.nodes.iter().enumerate() {
            prop_assert_eq!(c.dag.nodes[c.merge.tree_to_dag[x]].label, n.label);
        }
    }

    #[test]
    fn certification_on_default_corpus(seed in any::<u64>()) {
        let t = tree_proof(seed, 40);
        let c = compress::compress_and_certify(&t).unwrap();
        prop_assert_eq!(c.dag.conclusion(), t.conclusion());
        prop_assert_eq!(c.star.conclusion(), t.conclusion());
        prop_assert!(c.metrics.bound_ok);
        prop_assert!(c.metrics.h_dag <= 2 * c.metrics.h_tree);
        prop_assert!(c.verified);
        let fsp_nodes: usize = c.dag.nodes.iter().filter(|n| matches!(n.rule, DagRule::Merged(_))).count();
        prop_assert_eq!(fsp_nodes, c.metrics.merged_nodes);
    }

    #[test]
    fn lm_agrees_with_ljt(seed in any::<u64>(), leaves in 2usize..9) {
        let vars = &gen::alphabet()[..3];
        let f = gen::random_formula(&mut gen::rng(seed), vars, leaves);
        let s = lm::prove_with(&Sequent::goal(f), &LmConfig::default()).unwrap();
        prop_assert_eq!(s.proof.is_some(), valid(f), "{}", f);
        if let Some(p) = s.proof {
            prop_assert!(lm::check_lm(&p));
            let t = lm::translate_lm_to_nd(&p).unwrap();
            prop_assert!(tree::proves_tree(&t));
            prop_assert_eq!(t.conclusion(), f);
        }
    }

    #[test]
    fn lm_premises_stay_in_subformula_closure(seed in any::<u64>()) {
        let (f, p) = gen::random_provable(&mut gen::rng(seed), 24, &LmConfig::default()).unwrap();
        // every formula in the proof is a subformula of the goal or an
        // implication between such subformulas (the shapes MEE introduces)
        let subs = f.subformulas();
        fn walk(p: &lm::LmProof, out: &mut Vec<Formula>) {
            out.extend(p.conclusion.antecedent().iter().copied());
            out.push(p.conclusion.succedent);
            for q in &p.premises {
                walk(q, out);
            }
        }
        let mut all = Vec::new();
        walk(&p, &mut all);
        for g in all {
            let ok = subs.contains(&g) || g.as_imp().is_some_and(|(a, b)| subs.contains(&a) && subs.contains(&b));
            prop_assert!(ok, "{} not in closure of {}", g, f);
        }
    }

    #[test]
    fn statman_size_bound(seed in any::<u64>()) {
        let g = gen::random_full(&mut gen::rng(seed), &gen::alphabet(), 40);
        let (t, _) = encode::statman_translate(&g);
        let n = g.size();
        prop_assert!(t.weight() <= n * n * n, "{} -> {}", n, t.weight());
    }

    #[test]
    fn random_family_restriction_is_well_formed(seed in any::<u64>()) {
        let t = tree::level_tree(&tree_proof(seed, 30));
        prop_assume!(t.len() >= 2);
        let c = compress::compress(&t).unwrap();
        let fsp = compress::build_fsp(&c.dag, &c.paths).unwrap();
        prop_assert!(compress::coherency(&c.dag, &fsp).ok());
        let (d, rename) = compress::restrict_to_fsp(&c.dag, &fsp).unwrap();
        let fam: PathFamily = fsp.remap(&rename);
        prop_assert_eq!(fam.len(), fsp.len());
        prop_assert!(dag::check_dag(&d).correct);
        prop_assert_eq!(d.conclusion(), t.conclusion());
    }
}
