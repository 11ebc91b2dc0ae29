//! The reduction tree for multi-conclusion calculi.
//!
//! Every node keeps all formulas of its parent, so the union of the
//! antecedents (succedents) along a branch is the antecedent (succedent) of
//! its last node. Step `k` applies phase `k mod 11`:
//!
//! | phase | reduces            | children |
//! |-------|--------------------|----------|
//! | 0     | `&` left           | 1        |
//! | 1     | `&` right          | 2^n      |
//! | 2     | `\|` left          | 2^n      |
//! | 3     | `\|` right         | 1        |
//! | 4     | `->` left          | 2^n      |
//! | 5     | `->` right (primal)| 1        |
//! | 6     | `forall` left      | 1        |
//! | 7     | `forall` right     | 1        |
//! | 8     | `exists` left      | 1        |
//! | 9     | `exists` right     | 1        |
//! | 10    | copy               | 1        |
//!
//! Phases 6 and 9 instantiate each formula with the first available term
//! it has not used yet. A branch is saturated once no phase can add a
//! formula or a term; it then never closes and a countermodel is read off.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Budget, Counters, ProverError, Verdict};
use crate::calculus::{Derivation, RuleId};
use crate::semantics::{check_qb_valuation, sequent_valid_qb, valuation_keys, QuasiBooleanModel};
use crate::syntax::{Formula, FreshNames, Sequent, Term};

pub const PHASES: usize = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

/// One branch of the reduction tree at step `step`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchState {
    pub sequent: Sequent,
    pub step: usize,
    /// Formulas already reduced by a once-only phase.
    pub reduced: BTreeSet<(Side, Formula)>,
    /// Terms in order of availability.
    pub available: Vec<Term>,
    /// Terms already used to instantiate each `forall` on the left and
    /// `exists` on the right.
    pub usage: BTreeMap<(Side, Formula), BTreeSet<Term>>,
    pub fresh_used: usize,
    /// Weak disjunction: phase 2 does nothing.
    pub weak_disjunction: bool,
    fresh: FreshNames,
}

impl BranchState {
    /// Root of the tree. Available terms are those of `s`; when there are
    /// none, one fresh variable is made available so the domain is non-empty.
    pub fn root(s: &Sequent, weak_disjunction: bool) -> Self {
        let mut taken: BTreeSet<String> =
            s.terms().into_iter().map(|t| t.name().to_owned()).collect();
        taken.extend(bound_names(s));
        let mut fresh = FreshNames::avoiding(taken);
        let mut available: Vec<Term> = s.terms().into_iter().collect();
        if available.is_empty() {
            available.push(Term::Free(fresh.next_name()));
        }
        BranchState {
            sequent: s.clone(),
            step: 1,
            reduced: BTreeSet::new(),
            available,
            usage: BTreeMap::new(),
            fresh_used: 0,
            weak_disjunction,
            fresh,
        }
    }

    pub fn phase(&self) -> usize {
        self.step % PHASES
    }

    pub fn is_closed(&self) -> bool {
        closing_formula(&self.sequent).is_some() || self.sequent.succedent.contains(&Formula::Top)
    }

    /// No phase can add a formula or an available term any more.
    pub fn is_saturated(&self) -> bool {
        let s = &self.sequent;
        let done = |side: Side, f: &Formula| self.reduced.contains(&(side, f.clone()));
        let all_used = |side: Side, f: &Formula| {
            let used = self.usage.get(&(side, f.clone()));
            self.available
                .iter()
                .all(|t| used.is_some_and(|u| u.contains(t)))
        };
        s.antecedent.iter().all(|f| match f {
            Formula::And(..) | Formula::Impl(..) | Formula::Exists(..) => done(Side::Left, f),
            Formula::Or(..) => self.weak_disjunction || done(Side::Left, f),
            Formula::Forall(..) => all_used(Side::Left, f),
            _ => true,
        }) && s.succedent.iter().all(|f| match f {
            Formula::And(..) | Formula::Or(..) | Formula::Impl(..) | Formula::Forall(..) => {
                done(Side::Right, f)
            }
            Formula::Exists(..) => all_used(Side::Right, f),
            _ => true,
        })
    }

    fn fresh_term(&mut self) -> Term {
        self.fresh_used += 1;
        let t = Term::Free(self.fresh.next_name());
        self.available.push(t.clone());
        t
    }
}

fn bound_names(s: &Sequent) -> BTreeSet<String> {
    fn walk(f: &Formula, out: &mut BTreeSet<String>) {
        match f {
            Formula::Top | Formula::Atom { .. } => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                out.insert(x.clone());
                walk(b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    for f in s.formulas() {
        walk(f, &mut out);
    }
    out
}

fn closing_formula(s: &Sequent) -> Option<&Formula> {
    s.antecedent.intersection(&s.succedent).next()
}

/// One reduction inside a step: a rule instance and, per premise, the
/// formulas it adds to each side.
#[derive(Clone, Debug)]
struct Reduction {
    rule: RuleId,
    principal: Formula,
    witness: Option<Term>,
    eigen: Option<String>,
    options: Vec<(Vec<Formula>, Vec<Formula>)>,
}

fn expand(b: &BranchState) -> (Vec<Reduction>, BranchState) {
    let mut next = b.clone();
    next.step += 1;
    let mut reds = Vec::new();
    let s = &b.sequent;
    let unreduced = |side: Side, pick: fn(&Formula) -> bool| -> Vec<Formula> {
        let part = if side == Side::Left {
            &s.antecedent
        } else {
            &s.succedent
        };
        part.iter()
            .filter(|f| pick(f) && !b.reduced.contains(&(side, (*f).clone())))
            .cloned()
            .collect()
    };
    let parts = |f: &Formula| -> (Formula, Formula) {
        match f {
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
                ((**l).clone(), (**r).clone())
            }
            _ => unreachable!(),
        }
    };
    let mark = |next: &mut BranchState, side: Side, f: &Formula| {
        next.reduced.insert((side, f.clone()));
    };
    match b.phase() {
        0 => {
            for f in unreduced(Side::Left, |f| matches!(f, Formula::And(..))) {
                let (l, r) = parts(&f);
                mark(&mut next, Side::Left, &f);
                reds.push(red(RuleId::AndL, f, vec![(vec![l, r], vec![])]));
            }
        }
        1 => {
            for f in unreduced(Side::Right, |f| matches!(f, Formula::And(..))) {
                let (l, r) = parts(&f);
                mark(&mut next, Side::Right, &f);
                reds.push(red(
                    RuleId::AndR,
                    f,
                    vec![(vec![], vec![l]), (vec![], vec![r])],
                ));
            }
        }
        2 if !b.weak_disjunction => {
            for f in unreduced(Side::Left, |f| matches!(f, Formula::Or(..))) {
                let (l, r) = parts(&f);
                mark(&mut next, Side::Left, &f);
                reds.push(red(
                    RuleId::OrL,
                    f,
                    vec![(vec![l], vec![]), (vec![r], vec![])],
                ));
            }
        }
        3 => {
            for f in unreduced(Side::Right, |f| matches!(f, Formula::Or(..))) {
                let (l, r) = parts(&f);
                mark(&mut next, Side::Right, &f);
                reds.push(red(RuleId::OrR, f, vec![(vec![], vec![l, r])]));
            }
        }
        4 => {
            for f in unreduced(Side::Left, |f| matches!(f, Formula::Impl(..))) {
                let (a, c) = parts(&f);
                mark(&mut next, Side::Left, &f);
                reds.push(red(
                    RuleId::ImplL,
                    f,
                    vec![(vec![c], vec![]), (vec![], vec![a])],
                ));
            }
        }
        5 => {
            for f in unreduced(Side::Right, |f| matches!(f, Formula::Impl(..))) {
                let (_, c) = parts(&f);
                mark(&mut next, Side::Right, &f);
                reds.push(red(RuleId::ImplRp, f, vec![(vec![], vec![c])]));
            }
        }
        6 | 9 => {
            let (side, rule) = if b.phase() == 6 {
                (Side::Left, RuleId::ForallL)
            } else {
                (Side::Right, RuleId::ExistsR)
            };
            let part = if side == Side::Left {
                &s.antecedent
            } else {
                &s.succedent
            };
            let quantified: Vec<Formula> = part
                .iter()
                .filter(|f| {
                    if side == Side::Left {
                        matches!(f, Formula::Forall(..))
                    } else {
                        matches!(f, Formula::Exists(..))
                    }
                })
                .cloned()
                .collect();
            for f in quantified {
                let used = next.usage.entry((side, f.clone())).or_default();
                let Some(t) = b.available.iter().find(|t| !used.contains(*t)).cloned() else {
                    continue;
                };
                used.insert(t.clone());
                let inst = f.instantiate(&t).expect("quantifier");
                let option = if side == Side::Left {
                    (vec![inst], vec![])
                } else {
                    (vec![], vec![inst])
                };
                let mut r = red(rule, f, vec![option]);
                r.witness = Some(t);
                reds.push(r);
            }
        }
        7 | 8 => {
            let (side, rule) = if b.phase() == 7 {
                (Side::Right, RuleId::ForallR)
            } else {
                (Side::Left, RuleId::ExistsL)
            };
            let pick: fn(&Formula) -> bool = if side == Side::Right {
                |f| matches!(f, Formula::Forall(..))
            } else {
                |f| matches!(f, Formula::Exists(..))
            };
            for f in unreduced(side, pick) {
                mark(&mut next, side, &f);
                let a = next.fresh_term();
                let inst = f.instantiate(&a).expect("quantifier");
                let option = if side == Side::Left {
                    (vec![inst], vec![])
                } else {
                    (vec![], vec![inst])
                };
                let mut r = red(rule, f, vec![option]);
                r.eigen = Some(a.name().to_owned());
                reds.push(r);
            }
        }
        _ => {}
    }
    (reds, next)
}

fn red(rule: RuleId, principal: Formula, options: Vec<(Vec<Formula>, Vec<Formula>)>) -> Reduction {
    Reduction {
        rule,
        principal,
        witness: None,
        eigen: None,
        options,
    }
}

fn add(s: &Sequent, option: &(Vec<Formula>, Vec<Formula>)) -> Sequent {
    let mut out = s.clone();
    out.antecedent.extend(option.0.iter().cloned());
    out.succedent.extend(option.1.iter().cloned());
    out
}

/// Children of a branch node, leftmost first. Branching reductions
/// multiply: with choices `c_1..c_n` the child adds option `c_i` of each.
fn children(reds: &[Reduction], base: &BranchState) -> Vec<BranchState> {
    let mut out = vec![base.sequent.clone()];
    for r in reds {
        out = out
            .iter()
            .flat_map(|s| r.options.iter().map(move |o| add(s, o)))
            .collect();
    }
    out.into_iter()
        .map(|sequent| BranchState {
            sequent,
            ..base.clone()
        })
        .collect()
}

/// Children produced by the phase of `b`. A closed node has none.
pub fn reduction_step(b: &BranchState) -> Vec<BranchState> {
    if b.is_closed() {
        return vec![];
    }
    let (reds, next) = expand(b);
    children(&reds, &next)
}

/// Rebuilds the inference steps of one expansion over the derivations of
/// its children (given in child order).
fn assemble(start: &Sequent, reds: &[Reduction], mut kids: Vec<Derivation>) -> Derivation {
    kids.reverse();
    build(start, reds, &mut kids)
}

fn build(cur: &Sequent, reds: &[Reduction], kids: &mut Vec<Derivation>) -> Derivation {
    let Some((r, rest)) = reds.split_first() else {
        return kids.pop().expect("one derivation per child");
    };
    let premises: Vec<Derivation> = r
        .options
        .iter()
        .map(|o| build(&add(cur, o), rest, kids))
        .collect();
    if premises.len() == 1 && &premises[0].conclusion == cur {
        return premises.into_iter().next().expect("one premise");
    }
    Derivation {
        conclusion: cur.clone(),
        rule: r.rule,
        principal: Some(r.principal.clone()),
        witness: r.witness.clone(),
        eigenvariable: r.eigen.clone(),
        premises,
    }
}

fn close(s: &Sequent) -> Derivation {
    match closing_formula(s) {
        Some(f) => Derivation::axiom(f.clone()).weaken_to(s),
        None => Derivation::top_axiom().weaken_to(s),
    }
}

/// A node on a branch whose sequent differs from its parent's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub step: usize,
    pub sequent: Sequent,
}

/// A branch of the reduction tree, root first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchTrace {
    pub entries: Vec<TraceEntry>,
    pub last: BranchState,
}

impl BranchTrace {
    pub fn saturated(&self) -> bool {
        self.last.is_saturated() && !self.last.is_closed()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("the branch is not saturated")]
    NotSaturated,
    #[error("the branch is closed")]
    Closed,
}

enum Outcome {
    Closed(Derivation),
    Saturated(BranchTrace),
    /// The branch was cut off; `global` when the whole run is out of budget.
    Open {
        trace: BranchTrace,
        global: bool,
    },
}

struct Run {
    budget: Budget,
    spent: Counters,
    path: Vec<TraceEntry>,
    first_open: Option<BranchTrace>,
}

impl Run {
    fn explore(&mut self, mut b: BranchState) -> Outcome {
        let depth = self.path.len();
        self.path.push(TraceEntry {
            step: b.step - 1,
            sequent: b.sequent.clone(),
        });
        // Single-child expansions along this stretch of the branch.
        let mut chain: Vec<(Sequent, Vec<Reduction>)> = Vec::new();
        let out = loop {
            if b.is_closed() {
                break Outcome::Closed(close(&b.sequent));
            }
            if b.is_saturated() {
                break Outcome::Saturated(self.trace(&b));
            }
            let global = self.spent.steps >= self.budget.max_steps
                || self.spent.nodes >= self.budget.max_branch_nodes;
            if global || b.fresh_used > self.budget.max_fresh_vars {
                break Outcome::Open {
                    trace: self.trace(&b),
                    global,
                };
            }
            self.spent.steps += 1;
            let (reds, next) = expand(&b);
            self.spent.fresh_vars = self.spent.fresh_vars.max(next.fresh_used);
            let kids = children(&reds, &next);
            self.spent.nodes += kids.len();
            if kids.len() == 1 {
                let kid = kids.into_iter().next().expect("one child");
                if kid.sequent != b.sequent {
                    self.path.push(TraceEntry {
                        step: kid.step - 1,
                        sequent: kid.sequent.clone(),
                    });
                }
                chain.push((b.sequent.clone(), reds));
                b = kid;
                continue;
            }
            let mut proofs = Vec::with_capacity(kids.len());
            let mut pending: Option<Outcome> = None;
            for kid in kids {
                match self.explore(kid) {
                    Outcome::Closed(d) => proofs.push(d),
                    sat @ Outcome::Saturated(_) => {
                        pending = Some(sat);
                        break;
                    }
                    Outcome::Open { trace, global } => {
                        if self.first_open.is_none() {
                            self.first_open = Some(trace.clone());
                        }
                        pending = Some(Outcome::Open { trace, global });
                        if global {
                            break;
                        }
                    }
                }
            }
            match pending {
                Some(o) => break o,
                None => break Outcome::Closed(assemble(&b.sequent, &reds, proofs)),
            }
        };
        self.path.truncate(depth);
        match out {
            Outcome::Closed(mut d) => {
                for (s, reds) in chain.into_iter().rev() {
                    d = assemble(&s, &reds, vec![d]);
                }
                Outcome::Closed(d)
            }
            other => other,
        }
    }

    fn trace(&self, b: &BranchState) -> BranchTrace {
        BranchTrace {
            entries: self.path.clone(),
            last: b.clone(),
        }
    }
}

pub(crate) fn run(s: &Sequent, weak_disjunction: bool, budget: Budget) -> Verdict {
    let mut r = Run {
        budget,
        spent: Counters::default(),
        path: Vec::new(),
        first_open: None,
    };
    match r.explore(BranchState::root(s, weak_disjunction)) {
        Outcome::Closed(d) => Verdict::Proved(d),
        Outcome::Saturated(trace) => {
            let model = extract_countermodel(&trace).ok();
            let verified = model.as_ref().is_some_and(|m| {
                check_qb_valuation(m).is_empty() && sequent_valid_qb(m, s) == Ok(false)
            });
            if verified {
                Verdict::Refuted {
                    model,
                    branch: Some(trace),
                }
            } else {
                Verdict::Unknown {
                    spent: r.spent,
                    candidate: model,
                }
            }
        }
        Outcome::Open { trace, .. } => {
            let candidate = r.first_open.as_ref().unwrap_or(&trace);
            Verdict::Unknown {
                spent: r.spent,
                candidate: read_model(&candidate.last),
            }
        }
    }
}

/// Reduction tree for QGPM.
pub fn build_reduction_tree(s: &Sequent, budget: Budget) -> Result<Verdict, ProverError> {
    budget.validate()?;
    Ok(run(s, false, budget))
}

/// The countermodel of a saturated branch: the domain is the available
/// terms, an atom is true iff it is in the antecedent, and an implication
/// is true iff it is in the antecedent or its consequent holds.
pub fn extract_countermodel(branch: &BranchTrace) -> Result<QuasiBooleanModel, ExtractError> {
    if branch.last.is_closed() {
        return Err(ExtractError::Closed);
    }
    if !branch.last.is_saturated() {
        return Err(ExtractError::NotSaturated);
    }
    Ok(read_model(&branch.last).expect("saturated branches have complete valuations"))
}

fn read_model(b: &BranchState) -> Option<QuasiBooleanModel> {
    let as_element = |f: &Formula| {
        f.map_terms(&mut |t| match t {
            Term::Free(n) | Term::Const(n) => Term::Const(n.clone()),
            other => other.clone(),
        })
    };
    let mut m = QuasiBooleanModel::new(b.available.iter().map(|t| t.name().to_owned()));
    m.wd_mode = b.weak_disjunction;
    let gamma: BTreeSet<Formula> = b.sequent.antecedent.iter().map(as_element).collect();
    let mut keys = BTreeSet::new();
    for f in b.sequent.formulas() {
        valuation_keys(&as_element(f), &m.domain, m.wd_mode, &mut keys);
    }
    let mut ordered: Vec<Formula> = keys.into_iter().collect();
    ordered.sort_by_key(|k| (k.complexity(), k.height()));
    for k in ordered {
        let v = match &k {
            Formula::Atom { .. } => gamma.contains(&k),
            Formula::Impl(_, c) => gamma.contains(&k) || m.eval_ground(c).ok()?,
            Formula::Or(l, r) => {
                gamma.contains(&k) || m.eval_ground(l).ok()? || m.eval_ground(r).ok()?
            }
            _ => unreachable!("valuation keys are atoms, implications and disjunctions"),
        };
        m.valuation.insert(k, v);
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_derivation;
    use crate::syntax::{parse_formula, parse_sequent, CalculusId};

    fn s(t: &str) -> Sequent {
        parse_sequent(t).unwrap()
    }

    fn f(t: &str) -> Formula {
        parse_formula(t).unwrap()
    }

    fn at_phase(seq: &str, phase: usize) -> BranchState {
        let mut b = BranchState::root(&s(seq), false);
        b.step = phase + PHASES;
        b
    }

    #[test]
    fn phase_five_keeps_only_the_consequent() {
        let kids = reduction_step(&at_phase("r => p -> q", 5));
        assert_eq!(kids.len(), 1);
        assert_eq!(kids[0].sequent, s("r => q, p -> q"));
    }

    #[test]
    fn phase_four_branches() {
        let kids = reduction_step(&at_phase("p -> q => r", 4));
        let seqs: Vec<Sequent> = kids.into_iter().map(|k| k.sequent).collect();
        assert_eq!(seqs, vec![s("q, p -> q => r"), s("p -> q => p, r")]);
    }

    #[test]
    fn phase_six_uses_first_unused_term() {
        let mut b = at_phase("forall x. B(x) => r", 6);
        b.available = vec![Term::free("a0")];
        let kids = reduction_step(&b);
        assert_eq!(
            kids[0].sequent.antecedent,
            BTreeSet::from([f("forall x. B(x)"), f("B(a0)")])
        );
        let again = reduction_step(&BranchState {
            step: 6 + 2 * PHASES,
            ..kids[0].clone()
        });
        assert_eq!(again[0].sequent, kids[0].sequent);
    }

    #[test]
    fn proves_constant_domain() {
        let cd = s("forall x. A | B(x) => A | forall x. B(x)");
        let v = build_reduction_tree(&cd, Budget::default()).unwrap();
        let Verdict::Proved(d) = v else {
            panic!("expected a proof, got {v:?}")
        };
        assert_eq!(d.conclusion, cd);
        assert_eq!(check_derivation(&d, CalculusId::QGPM, false), Ok(()));
    }

    #[test]
    fn refutes_p_implies_p() {
        let v = build_reduction_tree(&s("=> p -> p"), Budget::default()).unwrap();
        let Verdict::Refuted { model: Some(m), .. } = v else {
            panic!("expected refutation, got {v:?}")
        };
        assert_eq!(m.valuation.get(&f("p")), Some(&false));
        assert_eq!(m.valuation.get(&f("p -> p")), Some(&false));
    }
}
