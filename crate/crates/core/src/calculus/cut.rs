use std::collections::BTreeSet;

use thiserror::Error;

use super::{check_derivation, CheckFailure, Derivation, RuleId};
use crate::syntax::{CalculusId, Formula, FreshNames, Sequent, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CutError {
    #[error("input is not a QGP derivation: {0}")]
    InvalidInput(CheckFailure),
    #[error("cut elimination produced an invalid derivation: {0}")]
    Internal(CheckFailure),
}

/// Grade of a cut node: parse-tree height of the cut formula plus one.
pub fn grade(cut: &Derivation) -> usize {
    cut.principal.as_ref().map_or(0, |f| f.height() + 1)
}

/// Rank of a cut node: sum of the heights of its two premise subtrees.
pub fn rank(cut: &Derivation) -> usize {
    cut.premises.iter().map(Derivation::height).sum()
}

/// Removes every cut from a QGP (or QGPW, GP, GPW) derivation, keeping the
/// endsequent. Cuts are taken one at a time: among the cuts whose premises
/// are already cut-free, the one of greatest grade, then greatest rank, then
/// leftmost. Each is removed by the grade/rank reduction in [`mix`].
pub fn eliminate_cut(d: &Derivation) -> Result<Derivation, CutError> {
    check_derivation(d, CalculusId::QGP, true).map_err(CutError::InvalidInput)?;
    let mut fresh = FreshNames::avoiding(d.names());
    let mut cur = d.clone();
    while let Some(path) = select_cut(&cur) {
        let node = at(&cur, &path);
        let reduced = reduce_cut(node, &mut fresh);
        replace_at(&mut cur, &path, reduced);
    }
    check_derivation(&cur, CalculusId::QGP, false).map_err(CutError::Internal)?;
    Ok(cur)
}

fn select_cut(d: &Derivation) -> Option<Vec<usize>> {
    let mut best: Option<((usize, usize), Vec<usize>)> = None;
    let mut path = Vec::new();
    visit_cuts(d, &mut path, &mut best);
    best.map(|(_, p)| p)
}

// Pre-order, so the first candidate with a given key is the leftmost.
fn visit_cuts(
    d: &Derivation,
    path: &mut Vec<usize>,
    best: &mut Option<((usize, usize), Vec<usize>)>,
) {
    if d.rule == RuleId::Cut && d.premises.iter().all(|p| !p.has_cut()) {
        let key = (grade(d), rank(d));
        if best.as_ref().is_none_or(|(k, _)| key > *k) {
            *best = Some((key, path.clone()));
        }
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        visit_cuts(p, path, best);
        path.pop();
    }
}

fn at<'a>(d: &'a Derivation, path: &[usize]) -> &'a Derivation {
    path.iter().fold(d, |n, &i| &n.premises[i])
}

fn replace_at(d: &mut Derivation, path: &[usize], new: Derivation) {
    let mut node = d;
    for &i in path {
        node = &mut node.premises[i];
    }
    *node = new;
}

fn reduce_cut(cut: &Derivation, fresh: &mut FreshNames) -> Derivation {
    let phi = cut
        .principal
        .as_ref()
        .expect("checked cut has a cut formula");
    mix(&cut.premises[0], &cut.premises[1], phi, fresh).weaken_to(&cut.conclusion)
}

/// Given cut-free `d: G => phi` and `e: phi, H => theta`, a cut-free
/// derivation of `G, H - {phi} => theta`.
fn mix(d: &Derivation, e: &Derivation, phi: &Formula, fresh: &mut FreshNames) -> Derivation {
    let target = Sequent {
        antecedent: d
            .conclusion
            .antecedent
            .iter()
            .chain(e.conclusion.antecedent.iter().filter(|f| *f != phi))
            .cloned()
            .collect(),
        succedent: e.conclusion.succedent.clone(),
    };
    if !e.conclusion.antecedent.contains(phi) {
        return e.clone().weaken_to(&target);
    }
    match e.rule {
        RuleId::Axiom => return d.clone().weaken_to(&target),
        RuleId::Weakening => return mix(d, &e.premises[0], phi, fresh).weaken_to(&target),
        _ => {}
    }
    let principal_in_e = e.rule.is_left_rule() && e.principal.as_ref() == Some(phi);
    if !principal_in_e {
        return commute_right(d, e, phi, &target, fresh);
    }
    match d.rule {
        RuleId::Axiom => e.clone().weaken_to(&target),
        RuleId::Weakening => mix(&d.premises[0], e, phi, fresh).weaken_to(&target),
        r if r.is_left_rule() => commute_left(d, e, phi, &target, fresh),
        r if r.is_right_rule() => principal_reduction(d, e, phi, &target, fresh),
        r => unreachable!("{r} can not conclude `=> {phi}` in a cut-free derivation"),
    }
}

/// Formulas each premise adds to the antecedent (left rules only).
fn left_components(n: &Derivation) -> Vec<Vec<Formula>> {
    let p = n.principal.as_ref().expect("left rule has a principal");
    match (n.rule, p) {
        (RuleId::AndL, Formula::And(l, r)) => vec![vec![(**l).clone(), (**r).clone()]],
        (RuleId::OrL, Formula::Or(l, r)) => vec![vec![(**l).clone()], vec![(**r).clone()]],
        (RuleId::ImplL, Formula::Impl(_, b)) => vec![vec![(**b).clone()], vec![]],
        (RuleId::ForallL, _) => vec![vec![p
            .instantiate(n.witness.as_ref().expect("witness"))
            .expect("quantifier")]],
        (RuleId::ExistsL, _) => {
            let a = Term::Free(n.eigenvariable.clone().expect("eigenvariable"));
            vec![vec![p.instantiate(&a).expect("quantifier")]]
        }
        _ => unreachable!("not a left rule"),
    }
}

/// Renames the node's eigenvariable when it occurs in `avoid`.
fn clear_eigen(n: &Derivation, avoid: &BTreeSet<String>, fresh: &mut FreshNames) -> Derivation {
    match &n.eigenvariable {
        Some(a) if avoid.contains(a) => {
            let b = fresh.next_name();
            let bt = Term::Free(b.clone());
            let mut out = n.clone();
            out.premises = n.premises.iter().map(|p| p.replace_free(a, &bt)).collect();
            out.eigenvariable = Some(b);
            out
        }
        _ => n.clone(),
    }
}

fn rebuild(n: &Derivation, conclusion: Sequent, premises: Vec<Derivation>) -> Derivation {
    Derivation {
        conclusion,
        rule: n.rule,
        principal: n.principal.clone(),
        witness: n.witness.clone(),
        eigenvariable: n.eigenvariable.clone(),
        premises,
    }
}

// phi is not principal in e: push the cut into every premise of e that still
// assumes phi and reapply e's rule over the enlarged context.
fn commute_right(
    d: &Derivation,
    e: &Derivation,
    phi: &Formula,
    target: &Sequent,
    fresh: &mut FreshNames,
) -> Derivation {
    let e = clear_eigen(e, &target.free_vars(), fresh);
    let adds = if e.rule.is_left_rule() {
        left_components(&e)
    } else {
        vec![vec![]; e.premises.len()]
    };
    let premises = e
        .premises
        .iter()
        .zip(adds)
        .map(|(p, add)| {
            let sub = mix(d, p, phi, fresh);
            let mut ant = target.antecedent.clone();
            ant.extend(add);
            sub.weaken_to(&Sequent {
                antecedent: ant,
                succedent: p.conclusion.succedent.clone(),
            })
        })
        .collect();
    rebuild(&e, target.clone(), premises)
}

// phi is principal in e but d ends in a left rule: push the cut up into d.
fn commute_left(
    d: &Derivation,
    e: &Derivation,
    phi: &Formula,
    target: &Sequent,
    fresh: &mut FreshNames,
) -> Derivation {
    let d = clear_eigen(d, &target.free_vars(), fresh);
    let adds = left_components(&d);
    let premises = d
        .premises
        .iter()
        .zip(adds)
        .enumerate()
        .map(|(i, (p, add))| {
            let mut ant = target.antecedent.clone();
            ant.extend(add);
            if d.rule == RuleId::ImplL && i == 1 {
                // minor premise `G => a` keeps its own succedent
                p.clone().weaken_to(&Sequent {
                    antecedent: ant,
                    succedent: p.conclusion.succedent.clone(),
                })
            } else {
                mix(p, e, phi, fresh).weaken_to(&Sequent {
                    antecedent: ant,
                    succedent: target.succedent.clone(),
                })
            }
        })
        .collect();
    rebuild(&d, target.clone(), premises)
}

// phi is introduced on both sides immediately above the cut.
fn principal_reduction(
    d: &Derivation,
    e: &Derivation,
    phi: &Formula,
    target: &Sequent,
    fresh: &mut FreshNames,
) -> Derivation {
    let e = if e.rule == RuleId::ExistsL {
        let mut avoid = d.names();
        avoid.extend(e.eigenvariable.iter().cloned());
        clear_eigen(e, &avoid, fresh)
    } else {
        e.clone()
    };
    // Earlier copies of phi in e's premises go first (lower rank).
    let side: Vec<Derivation> = e.premises.iter().map(|p| mix(d, p, phi, fresh)).collect();
    let out = match (phi, d.rule, e.rule) {
        (Formula::And(l, r), RuleId::AndR, RuleId::AndL) => {
            let step = mix(&d.premises[0], &side[0], l, fresh);
            mix(&d.premises[1], &step, r, fresh)
        }
        (Formula::Or(l, r), RuleId::OrR, RuleId::OrL) => {
            let left_taken = d.premises[0].conclusion.succedent.contains(l);
            if left_taken {
                mix(&d.premises[0], &side[0], l, fresh)
            } else {
                mix(&d.premises[0], &side[1], r, fresh)
            }
        }
        // The primal case: only the cut on the consequent survives.
        (Formula::Impl(_, b), RuleId::ImplRp, RuleId::ImplL) => {
            mix(&d.premises[0], &side[0], b, fresh)
        }
        (Formula::Forall(..), RuleId::ForallR, RuleId::ForallL) => {
            let a = d.eigenvariable.as_ref().expect("eigenvariable");
            let u = e.witness.as_ref().expect("witness");
            let d0 = d.premises[0]
                .freshen_eigenvariables(fresh)
                .replace_free(a, u);
            let inst = phi.instantiate(u).expect("quantifier");
            mix(&d0, &side[0], &inst, fresh)
        }
        (Formula::Exists(..), RuleId::ExistsR, RuleId::ExistsL) => {
            let a = e.eigenvariable.as_ref().expect("eigenvariable");
            let u = d.witness.as_ref().expect("witness");
            let e0 = side[0].freshen_eigenvariables(fresh).replace_free(a, u);
            let inst = phi.instantiate(u).expect("quantifier");
            mix(&d.premises[0], &e0, &inst, fresh)
        }
        (f, r1, r2) => unreachable!("{r1} and {r2} can not both introduce {f}"),
    };
    out.weaken_to(target)
}
