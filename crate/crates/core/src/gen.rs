//! Seeded random instances: implicational formulas, provable formulas with
//! their proofs, full-language formulas, digraphs and A_f-correct dags.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::compress::{self, PathFamily};
use crate::dag::{self, DagDeduction, Edge};
use crate::encode::DiGraph;
use crate::error::Result;
use crate::formula::{Formula, Sequent, Var};
use crate::full::FullFormula;
use crate::lm::{self, LmConfig, LmProof};
use crate::tree::{self, TreeDeduction, TreeRule};

pub use rand::SeedableRng;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The default four-letter alphabet.
pub fn alphabet() -> Vec<Var> {
    ["p", "q", "r", "s"].iter().map(|n| Var::new(n)).collect()
}

fn catalan(n: usize) -> f64 {
    let mut c = 1.0;
    for k in 0..n {
        c = c * 2.0 * (2 * k + 1) as f64 / (k + 2) as f64;
    }
    c
}

/// Implication tree with `leaves` atoms, shape uniform among binary trees.
pub fn random_formula(rng: &mut impl Rng, vars: &[Var], leaves: usize) -> Formula {
    assert!(leaves >= 1 && !vars.is_empty());
    if leaves == 1 {
        return Formula::atom(*vars.choose(rng).expect("nonempty"));
    }
    // left subtree gets i leaves with probability C(i-1)·C(n-i-1)/C(n-1)
    let total = catalan(leaves - 1);
    let mut x = rng.gen::<f64>() * total;
    let mut left = leaves - 1;
    for i in 1..leaves {
        let w = catalan(i - 1) * catalan(leaves - i - 1);
        if x < w {
            left = i;
            break;
        }
        x -= w;
    }
    let a = random_formula(rng, vars, left);
    let b = random_formula(rng, vars, leaves - left);
    Formula::imp(a, b)
}

/// Random formula of weight at most `max_weight` (and at least 3).
pub fn random_formula_upto(rng: &mut impl Rng, vars: &[Var], max_weight: u64) -> Formula {
    let max_leaves = max_weight.div_ceil(2).max(2) as usize;
    let leaves = rng.gen_range(2..=max_leaves);
    random_formula(rng, vars, leaves)
}

/// Rejection-samples a formula provable at the default bound.
pub fn random_provable(rng: &mut impl Rng, max_weight: u64, cfg: &LmConfig) -> Result<(Formula, LmProof)> {
    random_provable_over(rng, &alphabet(), max_weight, cfg)
}

pub fn random_provable_over(rng: &mut impl Rng, vars: &[Var], max_weight: u64, cfg: &LmConfig) -> Result<(Formula, LmProof)> {
    loop {
        let f = random_formula_upto(rng, vars, max_weight);
        match lm::prove_with(&Sequent::goal(f), cfg) {
            Ok(s) => {
                if let Some(p) = s.proof {
                    return Ok((f, p));
                }
            }
            Err(crate::Error::Limit(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Full-language formula of size at most `max_size`.
pub fn random_full(rng: &mut impl Rng, vars: &[Var], max_size: usize) -> FullFormula {
    fn go(rng: &mut impl Rng, vars: &[Var], size: usize) -> FullFormula {
        if size <= 2 {
            return if rng.gen_bool(0.1) { FullFormula::Falsum } else { FullFormula::Atom(*vars.choose(rng).expect("nonempty")) };
        }
        let left = rng.gen_range(1..size - 1);
        let a = go(rng, vars, left);
        let b = go(rng, vars, size - 1 - left);
        match rng.gen_range(0..3) {
            0 => FullFormula::and(a, b),
            1 => FullFormula::or(a, b),
            _ => FullFormula::imp(a, b),
        }
    }
    let size = rng.gen_range(1..=max_size.max(1));
    let mut f = go(rng, vars, size);
    while f.size() > max_size as u64 {
        f = go(rng, vars, size);
    }
    f
}

/// Each ordered pair (loops included) is an edge with probability `p`.
pub fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> DiGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    DiGraph::new(n, edges).expect("edges are in range and distinct")
}

/// Tree proof of a random provable formula, translated from its LM proof.
pub fn random_tree_proof(rng: &mut impl Rng, max_weight: u64) -> Result<TreeDeduction> {
    let (_, p) = random_provable(rng, max_weight, &LmConfig::default())?;
    lm::translate_lm_to_nd(&p)
}

/// Wraps random subtrees in repetitions `Rep(k)` whose extra premises are
/// copies of the same subtree, keeping the deduction's verdict.
pub fn sprinkle_repetitions(rng: &mut impl Rng, t: &TreeDeduction, rate: f64) -> TreeDeduction {
    let mut b = tree::TreeBuilder::new();
    fn copy(t: &TreeDeduction, x: usize, b: &mut tree::TreeBuilder, rng: &mut impl Rng, rate: f64) -> usize {
        let n = &t.nodes[x];
        let prem: Vec<usize> = n.premises.iter().map(|&c| copy(t, c, b, rng, rate)).collect();
        let y = b.raw(n.label, n.rule.clone(), prem);
        if x != t.root && rng.gen_bool(rate) {
            let k = rng.gen_range(1..=2);
            let mut parts = vec![y];
            for _ in 1..k {
                parts.push(copy(t, x, b, rng, 0.0));
            }
            return b.raw(n.label, TreeRule::Rep(k), parts);
        }
        y
    }
    let r = copy(t, t.root, &mut b, rng, rate);
    b.finish(r)
}

/// A random dag that passes `check_dag` and is A_f-correct, with at most
/// `max_nodes` nodes, or `None` if this attempt produced none. The dag comes
/// from merging a random (possibly open) tree, pruning to a random
/// sibling-closed family of its paths and perturbing the extracted `f`.
pub fn random_af_correct_dag(rng: &mut impl Rng, max_nodes: usize) -> Result<Option<DagDeduction>> {
    let mut t = random_tree_proof(rng, 13)?;
    if rng.gen_bool(0.4) {
        // strip the final introduction, which may leave assumptions open
        if let TreeRule::ImpI(_) = t.nodes[t.root].rule {
            let body = t.nodes[t.root].premises[0];
            t = subtree(&t, body);
        }
    }
    if t.len() < 2 || matches!(t.nodes[t.root].rule, TreeRule::Assumption | TreeRule::Rep(_)) {
        return Ok(None);
    }
    let t = tree::level_tree(&t);
    let c = compress::merge_levels(&t);
    if c.dag.len() > 4 * max_nodes {
        return Ok(None);
    }
    let n = c.paths.len();
    let keep = rng.gen_range(0.3..=1.0);
    let mut start: Vec<usize> = (0..n).filter(|_| rng.gen_bool(keep)).collect();
    if start.is_empty() {
        start.push(rng.gen_range(0..n));
    }
    let fam = compress::sibling_closure(&c.dag, &c.paths, start)?;
    let (mut d, rename) = compress::restrict_to_fsp(&c.dag, &fam)?;
    if d.len() > max_nodes {
        return Ok(None);
    }
    let fam: PathFamily = fam.remap(&rename);
    d.f = compress::extract_f(&d, &fam);
    perturb_f(rng, &mut d);
    if !dag::check_dag(&d).correct {
        return Ok(None);
    }
    let t = dag::compute_af(&d)?;
    Ok(dag::check_af_correctness(&d, &t).then_some(d))
}

fn subtree(t: &TreeDeduction, x: usize) -> TreeDeduction {
    let mut b = tree::TreeBuilder::new();
    fn copy(t: &TreeDeduction, x: usize, b: &mut tree::TreeBuilder) -> usize {
        let n = &t.nodes[x];
        let prem: Vec<usize> = n.premises.iter().map(|&c| copy(t, c, b)).collect();
        b.raw(n.label, n.rule.clone(), prem)
    }
    let r = copy(t, x, &mut b);
    b.finish(r)
}

/// Random edits to `f`: drop selected edges, add in-edges, add entries for
/// other assumptions.
fn perturb_f(rng: &mut impl Rng, d: &mut DagDeduction) {
    if d.f.is_empty() || rng.gen_bool(0.3) {
        return;
    }
    let idx = d.index();
    let assumptions: Vec<Formula> = d.assumptions().into_iter().collect();
    let keys: Vec<(Edge, Formula)> = d.f.keys().copied().collect();
    for _ in 0..rng.gen_range(1..=3) {
        let (e, a) = *keys.choose(rng).expect("nonempty");
        let ins: Vec<Edge> = idx.ie[e.0].iter().map(|&i| idx.edges[i]).collect();
        match rng.gen_range(0..3) {
            0 => {
                if let Some(sel) = d.f.get_mut(&(e, a)) {
                    if let Some(&x) = sel.iter().collect::<Vec<_>>().choose(rng) {
                        let x = *x;
                        sel.remove(&x);
                    }
                }
            }
            1 => {
                d.f.entry((e, a)).or_default().insert(*ins.choose(rng).expect("merged nodes have premises"));
            }
            _ => {
                let b = *assumptions.choose(rng).expect("leaves exist");
                let k = rng.gen_range(1..=ins.len());
                let sel: BTreeSet<Edge> = ins.choose_multiple(rng, k).copied().collect();
                d.f.insert((e, b), sel);
            }
        }
    }
}
