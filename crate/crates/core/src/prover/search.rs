//! Backward proof search for the single-conclusion calculus.
//!
//! Antecedents only grow upwards, so the invertible left rules (`&`,
//! `forall`, `exists`) are applied eagerly and a node whose sequent already
//! occurs below it on the branch is abandoned. Depth is bounded and raised
//! between passes; a pass that fails without hitting any bound refutes the
//! sequent.

use std::collections::BTreeSet;

use super::{Budget, Counters, Verdict};
use crate::calculus::{Derivation, RuleId};
use crate::syntax::{Formula, FreshNames, Sequent, Term};

type Set = BTreeSet<Formula>;

const FIRST_DEPTH: usize = 8;
const MAX_DEPTH: usize = 512;

struct SatStep {
    rule: RuleId,
    principal: Formula,
    witness: Option<Term>,
    eigen: Option<String>,
    before: Set,
}

struct Search {
    weak_disjunction: bool,
    budget: Budget,
    spent: Counters,
    fresh: FreshNames,
    /// Instantiates quantifiers when the sequent has no terms at all.
    guard: Term,
    depth_cut: bool,
    fresh_cut: bool,
    out_of_steps: bool,
    path: Vec<(Set, Formula)>,
}

/// Searches for a cut-free QGP derivation (QGPW with `weak_disjunction`) of
/// a sequent with exactly one succedent formula.
pub fn search_single(s: &Sequent, weak_disjunction: bool, budget: Budget) -> Verdict {
    let goal = s.sole_succedent().expect("single succedent").clone();
    let mut taken: BTreeSet<String> = s.terms().into_iter().map(|t| t.name().to_owned()).collect();
    for f in s.formulas() {
        collect_binders(f, &mut taken);
    }
    let mut fresh = FreshNames::avoiding(taken);
    let guard = Term::Free(fresh.next_name());
    let mut search = Search {
        weak_disjunction,
        budget,
        spent: Counters::default(),
        fresh,
        guard,
        depth_cut: false,
        fresh_cut: false,
        out_of_steps: false,
        path: Vec::new(),
    };
    let mut depth = FIRST_DEPTH;
    loop {
        search.depth_cut = false;
        search.fresh_cut = false;
        if let Some(d) = search.prove(s.antecedent.clone(), &goal, &BTreeSet::new(), 0, depth) {
            return Verdict::Proved(d);
        }
        if search.out_of_steps {
            break;
        }
        if !search.depth_cut && !search.fresh_cut {
            return Verdict::Refuted {
                model: None,
                branch: None,
            };
        }
        if !search.depth_cut || depth >= MAX_DEPTH {
            break;
        }
        depth = (depth * 2).min(MAX_DEPTH);
    }
    Verdict::Unknown {
        spent: search.spent,
        candidate: None,
    }
}

fn collect_binders(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Top | Formula::Atom { .. } => {}
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
            collect_binders(l, out);
            collect_binders(r, out);
        }
        Formula::Forall(x, b) | Formula::Exists(x, b) => {
            out.insert(x.clone());
            collect_binders(b, out);
        }
    }
}

fn with(g: &Set, f: &Formula) -> Set {
    let mut out = g.clone();
    out.insert(f.clone());
    out
}

impl Search {
    fn universe(&self, gamma: &Set, goal: &Formula) -> Vec<Term> {
        let mut terms: BTreeSet<Term> = goal.terms();
        for f in gamma {
            terms.extend(f.terms());
        }
        if terms.is_empty() {
            vec![self.guard.clone()]
        } else {
            terms.into_iter().collect()
        }
    }

    fn fresh_var(&mut self, used: &mut usize) -> Option<String> {
        if *used >= self.budget.max_fresh_vars {
            self.fresh_cut = true;
            return None;
        }
        *used += 1;
        self.spent.fresh_vars = self.spent.fresh_vars.max(*used);
        Some(self.fresh.next_name())
    }

    /// Closes `gamma` under `&` left, `exists` left (once per formula) and
    /// `forall` left over the current terms.
    fn saturate(
        &mut self,
        mut gamma: Set,
        goal: &Formula,
        exists_done: &mut BTreeSet<Formula>,
        fresh_used: &mut usize,
    ) -> (Set, Vec<SatStep>) {
        let mut steps = Vec::new();
        loop {
            let mut changed = false;
            let formulas: Vec<Formula> = gamma.iter().cloned().collect();
            for f in &formulas {
                match f {
                    Formula::And(l, r) if !(gamma.contains(l) && gamma.contains(r)) => {
                        let before = gamma.clone();
                        gamma.insert((**l).clone());
                        gamma.insert((**r).clone());
                        steps.push(SatStep {
                            rule: RuleId::AndL,
                            principal: f.clone(),
                            witness: None,
                            eigen: None,
                            before,
                        });
                        changed = true;
                    }
                    Formula::Exists(..) if !exists_done.contains(f) => {
                        let Some(a) = self.fresh_var(fresh_used) else {
                            continue;
                        };
                        exists_done.insert(f.clone());
                        let before = gamma.clone();
                        gamma.insert(f.instantiate(&Term::Free(a.clone())).expect("quantifier"));
                        steps.push(SatStep {
                            rule: RuleId::ExistsL,
                            principal: f.clone(),
                            witness: None,
                            eigen: Some(a),
                            before,
                        });
                        changed = true;
                    }
                    _ => {}
                }
            }
            for f in formulas.iter().filter(|f| matches!(f, Formula::Forall(..))) {
                for t in self.universe(&gamma, goal) {
                    let inst = f.instantiate(&t).expect("quantifier");
                    if gamma.contains(&inst) {
                        continue;
                    }
                    let before = gamma.clone();
                    gamma.insert(inst);
                    steps.push(SatStep {
                        rule: RuleId::ForallL,
                        principal: f.clone(),
                        witness: Some(t),
                        eigen: None,
                        before,
                    });
                    changed = true;
                }
            }
            if !changed {
                return (gamma, steps);
            }
        }
    }

    fn prove(
        &mut self,
        gamma: Set,
        goal: &Formula,
        exists_done: &BTreeSet<Formula>,
        fresh_used: usize,
        depth: usize,
    ) -> Option<Derivation> {
        if self.spent.steps >= self.budget.max_steps {
            self.out_of_steps = true;
            return None;
        }
        self.spent.steps += 1;
        self.spent.nodes += 1;
        let mut exists_done = exists_done.clone();
        let mut fresh_used = fresh_used;
        let (gamma, sat) = self.saturate(gamma, goal, &mut exists_done, &mut fresh_used);
        let mut d = self.node(&gamma, goal, &exists_done, fresh_used, depth)?;
        for step in sat.into_iter().rev() {
            d = Derivation {
                conclusion: Sequent::single(step.before, goal.clone()),
                rule: step.rule,
                principal: Some(step.principal),
                witness: step.witness,
                eigenvariable: step.eigen,
                premises: vec![d],
            };
        }
        Some(d)
    }

    fn node(
        &mut self,
        gamma: &Set,
        goal: &Formula,
        exists_done: &BTreeSet<Formula>,
        fresh_used: usize,
        depth: usize,
    ) -> Option<Derivation> {
        let here = Sequent::single(gamma.iter().cloned(), goal.clone());
        if *goal == Formula::Top {
            return Some(Derivation::top_axiom().weaken_to(&here));
        }
        if gamma.contains(goal) {
            return Some(Derivation::axiom(goal.clone()).weaken_to(&here));
        }
        if self.path.iter().any(|(g, t)| t == goal && g == gamma) {
            return None;
        }
        if depth == 0 {
            self.depth_cut = true;
            return None;
        }
        self.path.push((gamma.clone(), goal.clone()));
        let out = self.expand(&here, gamma, goal, exists_done, fresh_used, depth - 1);
        self.path.pop();
        out
    }

    fn expand(
        &mut self,
        here: &Sequent,
        gamma: &Set,
        goal: &Formula,
        ex: &BTreeSet<Formula>,
        fresh_used: usize,
        depth: usize,
    ) -> Option<Derivation> {
        let rule = |rule: RuleId, principal: &Formula, premises: Vec<Derivation>| Derivation {
            conclusion: here.clone(),
            rule,
            principal: Some(principal.clone()),
            witness: None,
            eigenvariable: None,
            premises,
        };
        match goal {
            Formula::And(l, r) => {
                let a = self.prove(gamma.clone(), l, ex, fresh_used, depth)?;
                let b = self.prove(gamma.clone(), r, ex, fresh_used, depth)?;
                return Some(rule(RuleId::AndR, goal, vec![a, b]));
            }
            Formula::Forall(..) => {
                let mut used = fresh_used;
                let a = self.fresh_var(&mut used)?;
                let inst = goal
                    .instantiate(&Term::Free(a.clone()))
                    .expect("quantifier");
                let p = self.prove(gamma.clone(), &inst, ex, used, depth)?;
                return Some(rule(RuleId::ForallR, goal, vec![p]).with_eigenvariable(a));
            }
            _ => {}
        }
        if !self.weak_disjunction {
            let split = gamma.iter().find_map(|f| match f {
                Formula::Or(l, r) if !gamma.contains(l) && !gamma.contains(r) => Some((f, l, r)),
                _ => None,
            });
            if let Some((f, l, r)) = split {
                let a = self.prove(with(gamma, l), goal, ex, fresh_used, depth)?;
                let b = self.prove(with(gamma, r), goal, ex, fresh_used, depth)?;
                return Some(rule(RuleId::OrL, f, vec![a, b]));
            }
        }
        match goal {
            Formula::Or(l, r) => {
                for part in [l, r] {
                    if let Some(p) = self.prove(gamma.clone(), part, ex, fresh_used, depth) {
                        return Some(rule(RuleId::OrR, goal, vec![p]));
                    }
                    if self.out_of_steps {
                        return None;
                    }
                }
            }
            Formula::Impl(_, c) => {
                if let Some(p) = self.prove(gamma.clone(), c, ex, fresh_used, depth) {
                    return Some(rule(RuleId::ImplRp, goal, vec![p]));
                }
            }
            Formula::Exists(..) => {
                for t in self.universe(gamma, goal) {
                    let inst = goal.instantiate(&t).expect("quantifier");
                    if let Some(p) = self.prove(gamma.clone(), &inst, ex, fresh_used, depth) {
                        return Some(rule(RuleId::ExistsR, goal, vec![p]).with_witness(t));
                    }
                    if self.out_of_steps {
                        return None;
                    }
                }
            }
            _ => {}
        }
        let implications: Vec<(Formula, Formula, Formula)> = gamma
            .iter()
            .filter_map(|f| match f {
                Formula::Impl(a, b) if !gamma.contains(b) => {
                    Some((f.clone(), (**a).clone(), (**b).clone()))
                }
                _ => None,
            })
            .collect();
        for (f, a, b) in implications {
            if self.out_of_steps {
                return None;
            }
            let Some(minor) = self.prove(gamma.clone(), &a, ex, fresh_used, depth) else {
                continue;
            };
            if let Some(major) = self.prove(with(gamma, &b), goal, ex, fresh_used, depth) {
                return Some(rule(RuleId::ImplL, &f, vec![major, minor]));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_derivation;
    use crate::syntax::{parse_sequent, CalculusId};

    fn run(s: &str) -> Verdict {
        search_single(&parse_sequent(s).unwrap(), false, Budget::default())
    }

    #[test]
    fn proofs_check() {
        for s in [
            "p, p -> q => q",
            "p & q => q & p",
            "p | q => q | p",
            "=> p -> T",
            "q => p -> q",
            "forall x. P(x) => exists y. P(y)",
            "exists x. P(x) & Q(x) => exists x. P(x)",
            "forall x. P(x) & Q(x) => forall x. Q(x)",
        ] {
            let v = run(s);
            let Verdict::Proved(d) = v else {
                panic!("{s}: {v:?}")
            };
            assert_eq!(d.conclusion, parse_sequent(s).unwrap());
            assert_eq!(check_derivation(&d, CalculusId::QGP, false), Ok(()), "{s}");
        }
    }

    #[test]
    fn refutations() {
        for s in [
            "=> p -> p",
            "p -> q => q",
            "p | q => p",
            "forall x. A | B(x) => A | forall x. B(x)",
        ] {
            assert!(run(s).is_refuted(), "{s}");
        }
    }

    #[test]
    fn weak_disjunction_has_no_case_split() {
        let s = parse_sequent("p | q => q | p").unwrap();
        assert!(search_single(&s, true, Budget::default()).is_refuted());
    }
}
