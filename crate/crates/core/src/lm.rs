//! Contraction-free sequent calculus for minimal implicational logic:
//! axiom `MA`, right rules `MI1`/`MI2`, left rules `MEP`/`MEE`. Bounded
//! backward search, proof checking, and translation to natural deduction.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Formula, Sequent, Var};
use crate::tree::{self, TreeBuilder, TreeDeduction, TreeRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum LmRule {
    /// `Γ,p ⇒ p`.
    MA { p: Formula },
    /// `Γ,α ⇒ β / Γ ⇒ α→β`, unless some `(α→β)→γ ∈ Γ`.
    MI1 { alpha: Formula, beta: Formula },
    /// `Γ,α,β→γ ⇒ β / Γ,(α→β)→γ ⇒ α→β`.
    MI2 { alpha: Formula, beta: Formula, gamma: Formula },
    /// `Γ,p,γ ⇒ q / Γ,p,p→γ ⇒ q`, with `q ∈ VAR(Γ,γ)`, `p ≠ q`.
    MEP { p: Formula, gamma: Formula },
    /// `Γ,α,β→γ ⇒ β    Γ,γ ⇒ q / Γ,(α→β)→γ ⇒ q`, with `q ∈ VAR(Γ,γ)`.
    MEE { alpha: Formula, beta: Formula, gamma: Formula },
}

impl LmRule {
    pub fn name(&self) -> &'static str {
        match self {
            LmRule::MA { .. } => "MA",
            LmRule::MI1 { .. } => "MI1",
            LmRule::MI2 { .. } => "MI2",
            LmRule::MEP { .. } => "MEP",
            LmRule::MEE { .. } => "MEE",
        }
    }

    /// Premises of this instance below `concl`, or why it does not apply.
    pub fn premises(&self, concl: &Sequent) -> std::result::Result<Vec<Sequent>, String> {
        let succ = concl.succedent;
        let need = |ok: bool, why: &str| if ok { Ok(()) } else { Err(why.to_string()) };
        match *self {
            LmRule::MA { p } => {
                need(p.is_atom(), "MA on a non-atomic formula")?;
                need(succ == p, "MA succedent differs")?;
                need(concl.contains(p), "MA formula missing from antecedent")?;
                Ok(vec![])
            }
            LmRule::MI1 { alpha, beta } => {
                need(succ == Formula::imp(alpha, beta), "MI1 succedent is not α→β")?;
                need(!concl.antecedent().iter().any(|g| g.as_imp().is_some_and(|(a, _)| a == succ)), "MI1 blocked by (α→β)→γ in antecedent")?;
                Ok(vec![concl.edit(&[], &[alpha], beta).expect("nothing removed")])
            }
            LmRule::MI2 { alpha, beta, gamma } => {
                let ab = Formula::imp(alpha, beta);
                need(succ == ab, "MI2 succedent is not α→β")?;
                let prem = concl.edit(&[Formula::imp(ab, gamma)], &[alpha, Formula::imp(beta, gamma)], beta).ok_or("MI2 principal (α→β)→γ missing")?;
                Ok(vec![prem])
            }
            LmRule::MEP { p, gamma } => {
                need(p.is_atom() && succ.is_atom(), "MEP needs atomic p and q")?;
                need(p != succ, "MEP requires p ≠ q")?;
                let rest = concl.edit(&[p, Formula::imp(p, gamma)], &[], succ).ok_or("MEP principal p, p→γ missing")?;
                need(var_in(succ, &rest, gamma), "MEP requires q ∈ VAR(Γ,γ)")?;
                Ok(vec![concl.edit(&[Formula::imp(p, gamma)], &[gamma], succ).expect("checked above")])
            }
            LmRule::MEE { alpha, beta, gamma } => {
                need(succ.is_atom(), "MEE needs an atomic succedent")?;
                let principal = Formula::imp(Formula::imp(alpha, beta), gamma);
                let rest = concl.edit(&[principal], &[], succ).ok_or("MEE principal (α→β)→γ missing")?;
                need(var_in(succ, &rest, gamma), "MEE requires q ∈ VAR(Γ,γ)")?;
                Ok(vec![
                    rest.edit(&[], &[alpha, Formula::imp(beta, gamma)], beta).expect("nothing removed"),
                    rest.edit(&[], &[gamma], succ).expect("nothing removed"),
                ])
            }
        }
    }
}

/// `q ∈ VAR(Γ,γ)` for atomic `q`.
fn var_in(q: Formula, rest: &Sequent, gamma: Formula) -> bool {
    let v: Var = q.as_atom().expect("atomic");
    gamma.mentions(v) || rest.antecedent().iter().any(|g| g.mentions(v))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LmProof {
    pub rule: LmRule,
    pub conclusion: Sequent,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<LmProof>,
}

impl LmProof {
    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(LmProof::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(LmProof::size).sum::<usize>()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LmViolation {
    /// Child indices from the root.
    pub path: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LmReport {
    pub valid: bool,
    pub violations: Vec<LmViolation>,
}

pub fn check_lm_report(p: &LmProof) -> LmReport {
    fn go(p: &LmProof, path: &mut Vec<usize>, out: &mut Vec<LmViolation>) {
        match p.rule.premises(&p.conclusion) {
            Err(reason) => out.push(LmViolation { path: path.clone(), reason }),
            Ok(expected) => {
                let got: Vec<&Sequent> = p.premises.iter().map(|q| &q.conclusion).collect();
                if expected.iter().collect::<Vec<_>>() != got {
                    out.push(LmViolation { path: path.clone(), reason: format!("{} premises do not match", p.rule.name()) });
                }
            }
        }
        for (i, q) in p.premises.iter().enumerate() {
            path.push(i);
            go(q, path, out);
            path.pop();
        }
    }
    let mut violations = Vec::new();
    go(p, &mut Vec::new(), &mut violations);
    LmReport { valid: violations.is_empty(), violations }
}

pub fn check_lm(p: &LmProof) -> bool {
    check_lm_report(p).valid
}

/// Candidate rule instances for backward search, in search order.
pub fn applicable(s: &Sequent) -> Vec<LmRule> {
    let succ = s.succedent;
    let mut distinct: Vec<Formula> = s.antecedent().to_vec();
    distinct.dedup();
    let mut out = Vec::new();
    if succ.is_atom() {
        if s.contains(succ) {
            out.push(LmRule::MA { p: succ });
        }
        for &g in &distinct {
            if let Some((p, gamma)) = g.as_imp() {
                if p.is_atom() && s.contains(p) {
                    out.push(LmRule::MEP { p, gamma });
                }
            }
        }
    }
    if let Some((alpha, beta)) = succ.as_imp() {
        let mut blocked = false;
        for &g in &distinct {
            if let Some((ab, gamma)) = g.as_imp() {
                if ab == succ {
                    blocked = true;
                    out.push(LmRule::MI2 { alpha, beta, gamma });
                }
            }
        }
        if !blocked {
            out.push(LmRule::MI1 { alpha, beta });
        }
    }
    if succ.is_atom() {
        for &g in &distinct {
            if let Some((ab, gamma)) = g.as_imp() {
                if let Some((alpha, beta)) = ab.as_imp() {
                    out.push(LmRule::MEE { alpha, beta, gamma });
                }
            }
        }
    }
    out.retain(|r| r.premises(s).is_ok());
    out
}

/// Default cap on search nodes per goal.
pub const NODE_BUDGET: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LmConfig {
    /// Depth bound is `bound_mult · weight(goal)`.
    pub bound_mult: u64,
    /// Multiplier retried once if the first bound fails; `None` disables it.
    pub escalate_to: Option<u64>,
    pub node_budget: u64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig { bound_mult: 2, escalate_to: Some(4), node_budget: NODE_BUDGET }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LmSearch {
    pub proof: Option<LmProof>,
    /// Depth bound of the last attempt.
    pub bound: usize,
    pub nodes: u64,
    /// Set when a failure was obtained under a bound below the default.
    pub caveat: Option<String>,
}

struct Searcher {
    /// Largest remaining depth at which the sequent is known to fail.
    failed: HashMap<Sequent, usize>,
    nodes: u64,
    budget: u64,
}

impl Searcher {
    fn search(&mut self, s: &Sequent, depth: usize) -> Result<Option<LmProof>> {
        if depth == 0 || self.failed.get(s).is_some_and(|&d| d >= depth) {
            return Ok(None);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Limit(format!("search exceeded {} nodes", self.budget)));
        }
        'rules: for rule in applicable(s) {
            let goals = rule.premises(s).expect("filtered by applicable");
            let mut premises = Vec::with_capacity(goals.len());
            for g in &goals {
                match self.search(g, depth - 1)? {
                    Some(p) => premises.push(p),
                    None => continue 'rules,
                }
            }
            return Ok(Some(LmProof { rule, conclusion: s.clone(), premises }));
        }
        let e = self.failed.entry(s.clone()).or_insert(0);
        *e = (*e).max(depth);
        Ok(None)
    }
}

/// Exhaustive depth-first search up to `depth_bound` rule applications on
/// any branch. `Ok(None)` means no proof within the bound.
pub fn prove_lm(goal: &Sequent, depth_bound: usize, node_budget: u64) -> Result<(Option<LmProof>, u64)> {
    if depth_bound == 0 {
        return Err(Error::Invalid("depth bound must be at least 1".into()));
    }
    let mut s = Searcher { failed: HashMap::new(), nodes: 0, budget: node_budget };
    let proof = s.search(goal, depth_bound)?;
    Ok((proof, s.nodes))
}

/// Search at `bound_mult · weight`, escalating once on failure.
pub fn prove_with(goal: &Sequent, cfg: &LmConfig) -> Result<LmSearch> {
    let w = goal.weight();
    let mut mults = vec![cfg.bound_mult.max(1)];
    if let Some(m) = cfg.escalate_to.filter(|&m| m > cfg.bound_mult) {
        mults.push(m);
    }
    let mut nodes = 0;
    let mut bound = 0;
    for m in mults {
        bound = (m * w) as usize;
        let (proof, n) = prove_lm(goal, bound, cfg.node_budget.saturating_sub(nodes).max(1))?;
        nodes += n;
        if proof.is_some() {
            return Ok(LmSearch { proof, bound, nodes, caveat: None });
        }
    }
    let caveat = (bound < (2 * w) as usize).then(|| format!("unproved at depth {bound}, below the default bound {}", 2 * w));
    Ok(LmSearch { proof: None, bound, nodes, caveat })
}

/// Convenience: `⇒ ρ` with the default configuration.
pub fn prove_formula(rho: Formula) -> Result<Option<LmProof>> {
    Ok(prove_with(&Sequent::goal(rho), &LmConfig::default())?.proof)
}

// ---------------------------------------------------------------------------
// Translation into natural deduction

#[derive(Debug)]
enum Nd {
    Assume(Formula),
    ImpI(Formula, Formula, Rc<Nd>),
    ImpE(Formula, Rc<Nd>, Rc<Nd>),
}

impl Nd {
    fn label(&self) -> Formula {
        match *self {
            Nd::Assume(f) | Nd::ImpI(f, _, _) | Nd::ImpE(f, _, _) => f,
        }
    }

    fn imp_i(a: Formula, body: Rc<Nd>) -> Rc<Nd> {
        Rc::new(Nd::ImpI(Formula::imp(a, body.label()), a, body))
    }

    fn imp_e(minor: Rc<Nd>, major: Rc<Nd>) -> Rc<Nd> {
        let (a, b) = major.label().as_imp().expect("major premise is an implication");
        debug_assert_eq!(a, minor.label());
        Rc::new(Nd::ImpE(b, minor, major))
    }
}

/// Replaces open `phi` assumptions of `d` by `by`.
fn subst(d: &Rc<Nd>, phi: Formula, by: &Rc<Nd>) -> Rc<Nd> {
    fn go(d: &Rc<Nd>, phi: Formula, by: &Rc<Nd>, memo: &mut HashMap<*const Nd, Rc<Nd>>) -> Rc<Nd> {
        if let Some(r) = memo.get(&Rc::as_ptr(d)) {
            return r.clone();
        }
        let r = match &**d {
            Nd::Assume(f) if *f == phi => by.clone(),
            Nd::Assume(_) => d.clone(),
            Nd::ImpI(_, a, _) if *a == phi => d.clone(),
            Nd::ImpI(_, a, b) => Nd::imp_i(*a, go(b, phi, by, memo)),
            Nd::ImpE(_, m, mm) => Nd::imp_e(go(m, phi, by, memo), go(mm, phi, by, memo)),
        };
        memo.insert(Rc::as_ptr(d), r.clone());
        r
    }
    go(d, phi, by, &mut HashMap::new())
}

/// `β→γ` from the assumption `(α→β)→γ`.
fn gadget(alpha: Formula, beta: Formula, gamma: Formula) -> Rc<Nd> {
    let ab = Nd::imp_i(alpha, Rc::new(Nd::Assume(beta)));
    let g = Nd::imp_e(ab, Rc::new(Nd::Assume(Formula::imp(Formula::imp(alpha, beta), gamma))));
    Nd::imp_i(beta, g)
}

fn to_nd(p: &LmProof) -> Rc<Nd> {
    let prem: Vec<Rc<Nd>> = p.premises.iter().map(to_nd).collect();
    match p.rule {
        LmRule::MA { p } => Rc::new(Nd::Assume(p)),
        LmRule::MI1 { alpha, .. } => Nd::imp_i(alpha, prem[0].clone()),
        LmRule::MEP { p, gamma } => {
            let g = Nd::imp_e(Rc::new(Nd::Assume(p)), Rc::new(Nd::Assume(Formula::imp(p, gamma))));
            subst(&prem[0], gamma, &g)
        }
        LmRule::MI2 { alpha, beta, gamma } => {
            let body = subst(&prem[0], Formula::imp(beta, gamma), &gadget(alpha, beta, gamma));
            Nd::imp_i(alpha, body)
        }
        LmRule::MEE { alpha, beta, gamma } => {
            let body = subst(&prem[0], Formula::imp(beta, gamma), &gadget(alpha, beta, gamma));
            let ab = Nd::imp_i(alpha, body);
            let g = Nd::imp_e(ab, Rc::new(Nd::Assume(Formula::imp(Formula::imp(alpha, beta), gamma))));
            subst(&prem[1], gamma, &g)
        }
    }
}

/// Largest tree the translation will materialize.
pub const TRANSLATION_LIMIT: usize = 2_000_000;

/// NM→ deduction of the succedent whose open assumptions lie in the
/// antecedent.
pub fn translate_lm_to_nd(p: &LmProof) -> Result<TreeDeduction> {
    let nd = to_nd(p);
    let mut sizes: HashMap<*const Nd, usize> = HashMap::new();
    fn size(d: &Rc<Nd>, memo: &mut HashMap<*const Nd, usize>) -> usize {
        if let Some(&s) = memo.get(&Rc::as_ptr(d)) {
            return s;
        }
        let s = match &**d {
            Nd::Assume(_) => 1,
            Nd::ImpI(_, _, b) => 1 + size(b, memo),
            Nd::ImpE(_, m, mm) => (1 + size(m, memo)).saturating_add(size(mm, memo)),
        }
        .min(usize::MAX / 4);
        memo.insert(Rc::as_ptr(d), s);
        s
    }
    let n = size(&nd, &mut sizes);
    if n > TRANSLATION_LIMIT {
        return Err(Error::Limit(format!("translated deduction has {n} nodes")));
    }
    fn build(d: &Nd, b: &mut TreeBuilder) -> tree::NodeId {
        match d {
            Nd::Assume(f) => b.assume(*f),
            Nd::ImpI(_, a, body) => {
                let x = build(body, b);
                b.imp_i(*a, x)
            }
            Nd::ImpE(f, m, mm) => {
                let x = build(m, b);
                let y = build(mm, b);
                b.raw(*f, TreeRule::ImpE, vec![x, y])
            }
        }
    }
    let mut b = TreeBuilder::new();
    let root = build(&nd, &mut b);
    Ok(b.finish(root))
}

/// Open assumption labels of a tree deduction.
pub fn open_assumptions(t: &TreeDeduction) -> BTreeSet<Formula> {
    t.leaf_closure().into_iter().filter(|&(_, c)| !c).map(|(x, _)| t.nodes[x].label).collect()
}
