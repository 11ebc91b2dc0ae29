//! Translations between the calculi.
//!
//! * [`qgp_to_qgpm`]: single- to multi-conclusion, by weakening.
//! * [`qgpm_to_qgp_cd`]: a QGPM derivation of `G => D` becomes a QGP
//!   derivation of `G => fold(D)` with cuts and constant-domain leaves.
//! * [`nd_to_gentzen`] and [`gentzen_to_nd`]: natural deduction to and from
//!   cut-free QGP.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::calculus::{
    check_derivation, check_derivation_with, eliminate_cut, CheckFailure, CheckOptions, CutError,
};
use crate::calculus::{Derivation, RuleId};
use crate::syntax::{CalculusId, Formula, FreshNames, Sequent, Term};

type Set = BTreeSet<Formula>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("input is not a {calculus} derivation: {failure}")]
    InvalidInput {
        calculus: CalculusId,
        failure: CheckFailure,
    },
    #[error("input must be cut-free")]
    HasCut,
    #[error("{0} has an empty succedent")]
    EmptySuccedent(Sequent),
    #[error("translation produced an invalid derivation: {0}")]
    Internal(CheckFailure),
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// Right-nested disjunction of `delta` in formula order; `None` when empty.
pub fn fold(delta: &Set) -> Option<Formula> {
    fold_list(&delta.iter().cloned().collect::<Vec<_>>())
}

fn fold_list(items: &[Formula]) -> Option<Formula> {
    let (last, init) = items.split_last()?;
    Some(
        init.iter()
            .rev()
            .fold(last.clone(), |acc, f| Formula::or(f.clone(), acc)),
    )
}

fn with(s: &Set, f: &Formula) -> Set {
    let mut out = s.clone();
    out.insert(f.clone());
    out
}

fn single(ant: &Set, goal: &Formula) -> Sequent {
    Sequent::single(ant.iter().cloned(), goal.clone())
}

fn invalid(calculus: CalculusId) -> impl Fn(CheckFailure) -> TransformError {
    move |failure| TransformError::InvalidInput { calculus, failure }
}

/// QGP to QGPM: projections of `|` right become weakening
/// followed by the two-formula rule, and the second premise of `->` left is
/// weakened by the conclusion's succedent.
pub fn qgp_to_qgpm(d: &Derivation) -> Result<Derivation, TransformError> {
    check_derivation(d, CalculusId::QGP, true).map_err(invalid(CalculusId::QGP))?;
    let target = CalculusId::QGPM;
    let out = to_multi(d);
    check_derivation(&out, target, true).map_err(TransformError::Internal)?;
    Ok(out)
}

fn to_multi(d: &Derivation) -> Derivation {
    let mut premises: Vec<Derivation> = d.premises.iter().map(to_multi).collect();
    match d.rule {
        RuleId::OrR => {
            let Some(Formula::Or(l, r)) = d
                .principal
                .clone()
                .or_else(|| d.conclusion.sole_succedent().cloned())
            else {
                unreachable!("checked")
            };
            let p = premises.pop().expect("one premise");
            let mut target = p.conclusion.clone();
            target.succedent.insert((*l).clone());
            target.succedent.insert((*r).clone());
            premises.push(p.weaken_to(&target));
        }
        RuleId::ImplL => {
            let minor = premises.pop().expect("two premises");
            let mut target = minor.conclusion.clone();
            target
                .succedent
                .extend(d.conclusion.succedent.iter().cloned());
            premises.push(minor.weaken_to(&target));
        }
        _ => {}
    }
    let principal = match d.rule {
        r if r.is_right_rule() => d
            .principal
            .clone()
            .or_else(|| d.conclusion.sole_succedent().cloned()),
        _ => d.principal.clone(),
    };
    Derivation {
        conclusion: d.conclusion.clone(),
        rule: d.rule,
        principal,
        witness: d.witness.clone(),
        eigenvariable: d.eigenvariable.clone(),
        premises,
    }
}

/// A translation from QGPM to QGP with constant-domain leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationReport {
    pub source: Derivation,
    pub target: Derivation,
    /// Constant-domain leaves of `target`, in pre-order.
    pub cd_instances: Vec<Sequent>,
    pub cuts_introduced: usize,
}

/// QGPM to QGP with cut and constant-domain leaves. The conclusion
/// `G => D` becomes `G => fold(D)`.
pub fn qgpm_to_qgp_cd(d: &Derivation) -> Result<TranslationReport, TransformError> {
    check_derivation(d, CalculusId::QGPM, true).map_err(invalid(CalculusId::QGPM))?;
    let out = Folder.tr(d)?;
    let opts = CheckOptions {
        calculus: CalculusId::QGP,
        allow_cut: true,
        allow_cd: true,
    };
    check_derivation_with(&out, opts).map_err(TransformError::Internal)?;
    let mut cd_instances = Vec::new();
    collect_cd(&out, &mut cd_instances);
    Ok(TranslationReport {
        source: d.clone(),
        cuts_introduced: out
            .count_rule(RuleId::Cut)
            .saturating_sub(d.count_rule(RuleId::Cut)),
        target: out,
        cd_instances,
    })
}

fn collect_cd(d: &Derivation, out: &mut Vec<Sequent>) {
    if d.rule == RuleId::CdAxiom {
        out.push(d.conclusion.clone());
    }
    for p in &d.premises {
        collect_cd(p, out);
    }
}

struct Folder;

impl Folder {
    fn fold(&self, s: &Sequent) -> Result<Formula, TransformError> {
        fold(&s.succedent).ok_or_else(|| TransformError::EmptySuccedent(s.clone()))
    }

    /// `ctx => fold(delta)` for `f` in both `ctx` and `delta`.
    fn inject(&self, delta: &Set, f: &Formula, ctx: &Set) -> Derivation {
        let items: Vec<Formula> = delta.iter().cloned().collect();
        self.inject_list(&items, f, ctx)
    }

    fn inject_list(&self, items: &[Formula], f: &Formula, ctx: &Set) -> Derivation {
        let goal = fold_list(items).expect("non-empty");
        if items.len() == 1 {
            return Derivation::axiom(f.clone()).weaken_to(&single(ctx, &goal));
        }
        let premise = if &items[0] == f {
            Derivation::axiom(f.clone()).weaken_to(&single(ctx, f))
        } else {
            self.inject_list(&items[1..], f, ctx)
        };
        Derivation::new(single(ctx, &goal), RuleId::OrR, vec![premise]).with_principal(goal)
    }

    /// From `e: ctx => phi` and `k: ctx, phi => goal`, `ctx => goal`.
    fn cut(&self, e: Derivation, k: Derivation) -> Derivation {
        let phi = e.conclusion.sole_succedent().expect("single").clone();
        let goal = k.conclusion.sole_succedent().expect("single").clone();
        let ctx = e.conclusion.antecedent.clone();
        Derivation::new(single(&ctx, &goal), RuleId::Cut, vec![e, k]).with_principal(phi)
    }

    /// `e: ctx => p` with `p` in `delta`, giving `ctx => fold(delta)`.
    fn fold_into(&self, e: Derivation, delta: &Set) -> Derivation {
        let p = e.conclusion.sole_succedent().expect("single").clone();
        if fold(delta).as_ref() == Some(&p) {
            return e;
        }
        let ctx = with(&e.conclusion.antecedent, &p);
        let k = self.inject(delta, &p, &ctx);
        self.cut(e, k)
    }

    /// `ctx, fold(sigma) => goal` by cases on the members of `sigma`; `each`
    /// proves `ctx', s => goal` for a member `s`, where `ctx'` is given.
    fn split(
        &self,
        sigma: &Set,
        ctx: &Set,
        goal: &Formula,
        each: &mut dyn FnMut(&Set, &Formula) -> Result<Derivation, TransformError>,
    ) -> Result<Derivation, TransformError> {
        let items: Vec<Formula> = sigma.iter().cloned().collect();
        self.split_list(&items, ctx, goal, each)
    }

    fn split_list(
        &self,
        items: &[Formula],
        ctx: &Set,
        goal: &Formula,
        each: &mut dyn FnMut(&Set, &Formula) -> Result<Derivation, TransformError>,
    ) -> Result<Derivation, TransformError> {
        let whole = fold_list(items).expect("non-empty");
        if items.len() == 1 {
            let c = with(ctx, &items[0]);
            let d = each(&c, &items[0])?;
            return Ok(d.weaken_to(&single(&c, goal)));
        }
        let c = with(ctx, &whole);
        let first = {
            let c1 = with(&c, &items[0]);
            each(&c1, &items[0])?.weaken_to(&single(&c1, goal))
        };
        let rest = self.split_list(&items[1..], &c, goal, each)?;
        Ok(Derivation::new(single(&c, goal), RuleId::OrL, vec![first, rest]).with_principal(whole))
    }

    /// `ctx, fold(small) => fold(big)` for `small` contained in `big`.
    fn widen(&self, small: &Set, big: &Set, ctx: &Set) -> Result<Derivation, TransformError> {
        let goal = fold(big).expect("non-empty");
        self.split(small, ctx, &goal, &mut |c, s| Ok(self.inject(big, s, c)))
    }

    fn tr(&self, d: &Derivation) -> Result<Derivation, TransformError> {
        let c = &d.conclusion;
        let gamma = &c.antecedent;
        let delta = &c.succedent;
        let goal = self.fold(c)?;
        let here = single(gamma, &goal);
        let principal = || {
            d.principal
                .clone()
                .expect("checked derivations name principals")
        };
        let kids = d
            .premises
            .iter()
            .map(|p| self.tr(p))
            .collect::<Result<Vec<_>, _>>()?;
        let out = match d.rule {
            RuleId::Axiom | RuleId::TopAxiom => d.clone(),
            RuleId::Weakening => {
                let prem = &d.premises[0].conclusion;
                let k = kids
                    .into_iter()
                    .next()
                    .expect("one premise")
                    .weaken_to(&single(gamma, &self.fold(prem)?));
                if prem.succedent == *delta {
                    k
                } else {
                    let w = self.widen(&prem.succedent, delta, gamma)?;
                    self.cut(k, w)
                }
            }
            RuleId::AndL | RuleId::OrL | RuleId::ForallL | RuleId::ExistsL => Derivation {
                conclusion: here,
                rule: d.rule,
                principal: d.principal.clone(),
                witness: d.witness.clone(),
                eigenvariable: d.eigenvariable.clone(),
                premises: kids,
            },
            RuleId::ImplL => {
                let p = principal();
                let Formula::Impl(a, b) = &p else {
                    unreachable!("checked")
                };
                let mut kids = kids.into_iter();
                let major = kids.next().expect("two premises");
                let minor = kids.next().expect("two premises");
                let sigma = &d.premises[1].conclusion.succedent;
                let minor = minor.weaken_to(&single(gamma, &fold(sigma).expect("non-empty")));
                let k = self.split(sigma, gamma, &goal, &mut |ctx, s| {
                    if s == a.as_ref() && !delta.contains(s) {
                        let m = major.clone().weaken_to(&single(&with(ctx, b), &goal));
                        let ax = Derivation::axiom(s.clone()).weaken_to(&single(ctx, s));
                        Ok(
                            Derivation::new(single(ctx, &goal), RuleId::ImplL, vec![m, ax])
                                .with_principal(p.clone()),
                        )
                    } else {
                        Ok(self.inject(delta, s, ctx))
                    }
                })?;
                self.cut(minor, k)
            }
            RuleId::OrR | RuleId::ImplRp | RuleId::ExistsR => {
                let p = principal();
                let adds = self.components(d, &p);
                let sigma = &d.premises[0].conclusion.succedent;
                let k = self.split(sigma, gamma, &goal, &mut |ctx, s| {
                    if adds.contains(s) {
                        let ax = Derivation::axiom(s.clone()).weaken_to(&single(ctx, s));
                        let mut r = Derivation::new(single(ctx, &p), d.rule, vec![ax])
                            .with_principal(p.clone());
                        r.witness = d.witness.clone();
                        Ok(self.fold_into(r, delta))
                    } else {
                        Ok(self.inject(delta, s, ctx))
                    }
                })?;
                self.cut(kids.into_iter().next().expect("one premise"), k)
            }
            RuleId::AndR => {
                let p = principal();
                let Formula::And(l, r) = &p else {
                    unreachable!("checked")
                };
                let mut kids = kids.into_iter();
                let left = kids.next().expect("two premises");
                let right = kids.next().expect("two premises");
                let s1 = &d.premises[0].conclusion.succedent;
                let s2 = &d.premises[1].conclusion.succedent;
                let f2 = fold(s2).expect("non-empty");
                let k = self.split(s1, gamma, &goal, &mut |c1, s| {
                    if s != l.as_ref() {
                        return Ok(self.inject(delta, s, c1));
                    }
                    let e2 = right.clone().weaken_to(&single(c1, &f2));
                    let k2 = self.split(s2, c1, &goal, &mut |c2, t| {
                        if t != r.as_ref() {
                            return Ok(self.inject(delta, t, c2));
                        }
                        let both = Derivation::new(
                            single(c2, &p),
                            RuleId::AndR,
                            vec![
                                Derivation::axiom((**l).clone()).weaken_to(&single(c2, l)),
                                Derivation::axiom((**r).clone()).weaken_to(&single(c2, r)),
                            ],
                        )
                        .with_principal(p.clone());
                        Ok(self.fold_into(both, delta))
                    })?;
                    Ok(self.cut(e2, k2))
                })?;
                self.cut(left, k)
            }
            RuleId::ForallR => {
                self.forall_right(d, kids.into_iter().next().expect("one premise"), &goal)?
            }
            RuleId::Cut => {
                let phi = principal();
                let mut kids = kids.into_iter();
                let left = kids.next().expect("two premises");
                let right = kids.next().expect("two premises");
                let s1 = &d.premises[0].conclusion.succedent;
                let s2 = &d.premises[1].conclusion.succedent;
                let left = left.weaken_to(&single(gamma, &fold(s1).expect("non-empty")));
                let k = self.split(s1, gamma, &goal, &mut |ctx, s| {
                    if s == &phi && !delta.contains(s) {
                        let e = right
                            .clone()
                            .weaken_to(&single(ctx, &fold(s2).expect("non-empty")));
                        let w = self.widen(s2, delta, ctx)?;
                        Ok(self.cut(e, w))
                    } else {
                        Ok(self.inject(delta, s, ctx))
                    }
                })?;
                self.cut(left, k)
            }
            RuleId::Trans | RuleId::CdAxiom => unreachable!("not QGPM rules"),
            _ => unreachable!("natural deduction rules are rejected by the check"),
        };
        Ok(out.weaken_to(&single(gamma, &goal)))
    }

    fn components(&self, d: &Derivation, p: &Formula) -> Set {
        match (d.rule, p) {
            (RuleId::OrR, Formula::Or(l, r)) => Set::from([(**l).clone(), (**r).clone()]),
            (RuleId::ImplRp, Formula::Impl(_, b)) => Set::from([(**b).clone()]),
            (RuleId::ExistsR, _) => Set::from([p
                .instantiate(d.witness.as_ref().expect("checked"))
                .expect("quantifier")]),
            _ => unreachable!("checked"),
        }
    }

    /// `forall` right: the premise gives `G => fold(D' u {A(a)})`. With
    /// `d = fold(D')` this is regrouped as `d | A(a)`, generalised to
    /// `forall x (d | A(x))`, and the constant-domain leaf moves the
    /// quantifier inside.
    fn forall_right(
        &self,
        d: &Derivation,
        kid: Derivation,
        goal: &Formula,
    ) -> Result<Derivation, TransformError> {
        let c = &d.conclusion;
        let gamma = &c.antecedent;
        let delta = &c.succedent;
        let p = d.principal.clone().expect("checked");
        let Formula::Forall(x, body) = &p else {
            unreachable!("checked")
        };
        let a = d.eigenvariable.clone().expect("checked");
        let inst = p.instantiate(&Term::Free(a.clone())).expect("quantifier");
        let sigma = &d.premises[0].conclusion.succedent;
        let mut rest = sigma.clone();
        rest.remove(&inst);
        let Some(dd) = fold(&rest) else {
            let r = Derivation::new(single(gamma, &p), RuleId::ForallR, vec![kid])
                .with_principal(p.clone())
                .with_eigenvariable(a);
            return Ok(self.fold_into(r, delta));
        };
        // G => d | A(a)
        let regrouped = Formula::or(dd.clone(), inst.clone());
        let k = self.split(sigma, gamma, &regrouped, &mut |ctx, s| {
            let premise = if s == &inst {
                Derivation::axiom(s.clone()).weaken_to(&single(ctx, s))
            } else {
                self.inject(&rest, s, ctx)
            };
            Ok(
                Derivation::new(single(ctx, &regrouped), RuleId::OrR, vec![premise])
                    .with_principal(regrouped.clone()),
            )
        })?;
        let grouped = self.cut(kid, k);
        // G => forall x (d | A(x))
        let general = Formula::Forall(
            x.clone(),
            Box::new(Formula::or(dd.clone(), (**body).clone())),
        );
        let gen = Derivation::new(single(gamma, &general), RuleId::ForallR, vec![grouped])
            .with_principal(general.clone())
            .with_eigenvariable(a);
        // forall x (d | A(x)) => d | forall x A(x)
        let moved = Formula::or(dd.clone(), p.clone());
        let cd = Derivation::new(
            single(&Set::from([general.clone()]), &moved),
            RuleId::CdAxiom,
            vec![],
        );
        let cd = cd.weaken_to(&single(&with(gamma, &general), &moved));
        let step = self.cut(gen, cd);
        // d | forall x A(x) => fold(D)
        let ctx = with(gamma, &moved);
        let tail = {
            let first = self.widen(&rest, delta, &with(&ctx, &dd))?;
            let first = first.weaken_to(&single(&with(&ctx, &dd), goal));
            let c2 = with(&ctx, &p);
            let second = self.inject(delta, &p, &c2);
            Derivation::new(single(&ctx, goal), RuleId::OrL, vec![first, second])
                .with_principal(moved.clone())
        };
        Ok(self.cut(step, tail))
    }
}

/// Natural deduction (QP or QPW) to cut-free QGP: elimination rules and
/// transitivity become cuts against left rules, which are then eliminated.
pub fn nd_to_gentzen(d: &Derivation) -> Result<Derivation, TransformError> {
    check_derivation(d, CalculusId::QP, true).map_err(invalid(CalculusId::QP))?;
    let with_cuts = nd_tr(d);
    check_derivation(&with_cuts, CalculusId::QGP, true).map_err(TransformError::Internal)?;
    Ok(eliminate_cut(&with_cuts)?)
}

fn nd_tr(d: &Derivation) -> Derivation {
    let c = &d.conclusion;
    let gamma = &c.antecedent;
    let goal = c.sole_succedent().expect("checked").clone();
    let kids: Vec<Derivation> = d.premises.iter().map(nd_tr).collect();
    let right = |rule: RuleId, kids: Vec<Derivation>| {
        let mut r = Derivation::new(c.clone(), rule, kids).with_principal(goal.clone());
        r.witness = d.witness.clone();
        r.eigenvariable = d.eigenvariable.clone();
        r
    };
    let cut = |e: Derivation, k: Derivation, phi: &Formula| {
        Derivation::new(c.clone(), RuleId::Cut, vec![e, k]).with_principal(phi.clone())
    };
    let prem_goal = |i: usize| {
        d.premises[i]
            .conclusion
            .sole_succedent()
            .expect("checked")
            .clone()
    };
    match d.rule {
        RuleId::Axiom | RuleId::TopAxiom => d.clone(),
        RuleId::Weakening => Derivation::new(c.clone(), RuleId::Weakening, kids),
        RuleId::AndI => right(RuleId::AndR, kids),
        RuleId::OrI1 | RuleId::OrI2 => right(RuleId::OrR, kids),
        RuleId::ImplIW => right(RuleId::ImplRp, kids),
        RuleId::Trans => {
            let phi = prem_goal(0);
            let mut kids = kids.into_iter();
            let first = kids.next().expect("two premises");
            cut(first, kids.next().expect("two premises"), &phi)
        }
        RuleId::ForallI => right(RuleId::ForallR, kids),
        RuleId::ExistsI => right(RuleId::ExistsR, kids),
        RuleId::AndE1 | RuleId::AndE2 | RuleId::ForallE => {
            let p = prem_goal(0);
            let inner = Set::from([p.clone(), goal.clone()]);
            let mut left = Derivation::new(
                single(&Set::from([p.clone()]), &goal),
                if d.rule == RuleId::ForallE {
                    RuleId::ForallL
                } else {
                    RuleId::AndL
                },
                vec![Derivation::axiom(goal.clone()).weaken_to(&single(&inner, &goal))],
            )
            .with_principal(p.clone());
            if d.rule == RuleId::AndE1 || d.rule == RuleId::AndE2 {
                let Formula::And(l, r) = &p else {
                    unreachable!("checked")
                };
                let both = Set::from([p.clone(), (**l).clone(), (**r).clone()]);
                left.premises =
                    vec![Derivation::axiom(goal.clone()).weaken_to(&single(&both, &goal))];
            } else {
                left.witness = d.witness.clone();
            }
            let left = left.weaken_to(&single(&with(gamma, &p), &goal));
            cut(kids.into_iter().next().expect("one premise"), left, &p)
        }
        RuleId::ImplE => {
            let p = prem_goal(1);
            let mut kids = kids.into_iter();
            let minor = kids.next().expect("two premises");
            let major = kids.next().expect("two premises");
            let ctx = with(gamma, &p);
            let left = Derivation::new(
                single(&ctx, &goal),
                RuleId::ImplL,
                vec![
                    Derivation::axiom(goal.clone()).weaken_to(&single(&with(&ctx, &goal), &goal)),
                    minor.weaken_to(&single(&ctx, &prem_goal(0))),
                ],
            )
            .with_principal(p.clone());
            cut(major, left, &p)
        }
        RuleId::OrE => {
            let p = prem_goal(2);
            let Formula::Or(l, r) = &p else {
                unreachable!("checked")
            };
            let mut kids = kids.into_iter();
            let first = kids.next().expect("three premises");
            let second = kids.next().expect("three premises");
            let major = kids.next().expect("three premises");
            let ctx = with(gamma, &p);
            let left = Derivation::new(
                single(&ctx, &goal),
                RuleId::OrL,
                vec![
                    first.weaken_to(&single(&with(&ctx, l), &goal)),
                    second.weaken_to(&single(&with(&ctx, r), &goal)),
                ],
            )
            .with_principal(p.clone());
            cut(major, left, &p)
        }
        RuleId::ExistsE => {
            let p = prem_goal(0);
            let a = d.eigenvariable.clone().expect("checked");
            let body = p.instantiate(&Term::Free(a.clone())).expect("quantifier");
            let mut kids = kids.into_iter();
            let major = kids.next().expect("two premises");
            let minor = kids.next().expect("two premises");
            let mut delta = d.premises[1].conclusion.antecedent.clone();
            delta.remove(&body);
            let ctx = with(&delta, &p);
            let left = Derivation::new(
                single(&ctx, &goal),
                RuleId::ExistsL,
                vec![minor.weaken_to(&single(&with(&ctx, &body), &goal))],
            )
            .with_principal(p.clone())
            .with_eigenvariable(a);
            cut(major, left, &p)
        }
        _ => unreachable!("sequent rules are rejected by the check"),
    }
}

/// Cut-free QGP (or QGPW) to natural deduction (QP, QPW). Left rules become
/// eliminations substituted for the hypotheses they introduce, so the result
/// has no transitivity steps.
pub fn gentzen_to_nd(d: &Derivation) -> Result<Derivation, TransformError> {
    if d.has_cut() {
        return Err(TransformError::HasCut);
    }
    check_derivation(d, CalculusId::QGP, false).map_err(invalid(CalculusId::QGP))?;
    let mut fresh = FreshNames::avoiding(d.names());
    let out = g_tr(d, &mut fresh);
    check_derivation(&out, CalculusId::QP, false).map_err(TransformError::Internal)?;
    Ok(out)
}

fn g_tr(d: &Derivation, fresh: &mut FreshNames) -> Derivation {
    let c = &d.conclusion;
    let gamma = &c.antecedent;
    let goal = c.sole_succedent().expect("checked").clone();
    let kids: Vec<Derivation> = d.premises.iter().map(|p| g_tr(p, fresh)).collect();
    let right = |rule: RuleId, kids: Vec<Derivation>| {
        let mut r = Derivation::new(c.clone(), rule, kids).with_principal(goal.clone());
        r.witness = d.witness.clone();
        r.eigenvariable = d.eigenvariable.clone();
        r
    };
    let hyp = |p: &Formula| Derivation::axiom(p.clone());
    let p = d.principal.clone();
    match d.rule {
        RuleId::Axiom | RuleId::TopAxiom => d.clone(),
        RuleId::Weakening => Derivation::new(c.clone(), RuleId::Weakening, kids),
        RuleId::AndR => right(RuleId::AndI, kids),
        RuleId::OrR => {
            let Formula::Or(l, _) = &goal else {
                unreachable!("checked")
            };
            let first = d.premises[0].conclusion.succedent.contains(l);
            right(if first { RuleId::OrI1 } else { RuleId::OrI2 }, kids)
        }
        RuleId::ImplRp => right(RuleId::ImplIW, kids),
        RuleId::ForallR => right(RuleId::ForallI, kids),
        RuleId::ExistsR => right(RuleId::ExistsI, kids),
        RuleId::AndL => {
            let p = p.expect("checked");
            let Formula::And(l, r) = &p else {
                unreachable!("checked")
            };
            let pick = |rule: RuleId, comp: &Formula| {
                Derivation::new(single(&Set::from([p.clone()]), comp), rule, vec![hyp(&p)])
                    .with_principal(p.clone())
            };
            let k = kids.into_iter().next().expect("one premise");
            let k = plug(&k, l, &pick(RuleId::AndE1, l), fresh);
            let k = plug(&k, r, &pick(RuleId::AndE2, r), fresh);
            k.weaken_to(c)
        }
        RuleId::ForallL => {
            let p = p.expect("checked");
            let t = d.witness.clone().expect("checked");
            let inst = p.instantiate(&t).expect("quantifier");
            let e = Derivation::new(
                single(&Set::from([p.clone()]), &inst),
                RuleId::ForallE,
                vec![hyp(&p)],
            )
            .with_principal(p.clone())
            .with_witness(t);
            plug(&kids[0], &inst, &e, fresh).weaken_to(c)
        }
        RuleId::ImplL => {
            let p = p.expect("checked");
            let Formula::Impl(a, b) = &p else {
                unreachable!("checked")
            };
            let mut kids = kids.into_iter();
            let major = kids.next().expect("two premises");
            let minor = kids.next().expect("two premises");
            let e = Derivation::new(
                single(gamma, b),
                RuleId::ImplE,
                vec![
                    minor.weaken_to(&single(gamma, a)),
                    hyp(&p).weaken_to(&single(gamma, &p)),
                ],
            )
            .with_principal(p.clone());
            plug(&major, b, &e, fresh).weaken_to(c)
        }
        RuleId::OrL => {
            let p = p.expect("checked");
            let Formula::Or(l, r) = &p else {
                unreachable!("checked")
            };
            let mut kids = kids.into_iter();
            let first = kids.next().expect("two premises");
            let second = kids.next().expect("two premises");
            Derivation::new(
                c.clone(),
                RuleId::OrE,
                vec![
                    first.weaken_to(&single(&with(gamma, l), &goal)),
                    second.weaken_to(&single(&with(gamma, r), &goal)),
                    hyp(&p).weaken_to(&single(gamma, &p)),
                ],
            )
            .with_principal(p.clone())
        }
        RuleId::ExistsL => {
            let p = p.expect("checked");
            let a = d.eigenvariable.clone().expect("checked");
            let body = p.instantiate(&Term::Free(a.clone())).expect("quantifier");
            let k = kids.into_iter().next().expect("one premise");
            let mut delta = k.conclusion.antecedent.clone();
            delta.remove(&body);
            delta.insert(p.clone());
            Derivation::new(single(&delta, &goal), RuleId::ExistsE, vec![hyp(&p), k])
                .with_principal(p.clone())
                .with_eigenvariable(a)
                .weaken_to(c)
        }
        _ => unreachable!("cut-free sequent rules only"),
    }
}

/// Replaces hypothesis `a` of `d` by the derivation `e` of `G' => a`; the
/// result proves `H - {a}, G' => goal` where `H` are the hypotheses of `d`.
/// Discharged occurrences of `a` are left alone.
fn plug(d: &Derivation, a: &Formula, e: &Derivation, fresh: &mut FreshNames) -> Derivation {
    let h = &d.conclusion.antecedent;
    if !h.contains(a) {
        return d.clone();
    }
    let mut ant = h.clone();
    ant.remove(a);
    ant.extend(e.conclusion.antecedent.iter().cloned());
    let goal = d.conclusion.sole_succedent().expect("single").clone();
    let target = single(&ant, &goal);
    let e_fv: BTreeSet<String> = e.conclusion.free_vars();
    // An eigenvariable free in `e` must be renamed before `e` moves above it.
    let d = match &d.eigenvariable {
        Some(v) if e_fv.contains(v) => {
            let nv = Term::Free(fresh.next_name());
            let mut r = d.clone();
            r.premises = r.premises.iter().map(|p| p.replace_free(v, &nv)).collect();
            r.eigenvariable = Some(nv.name().to_owned());
            r
        }
        _ => d.clone(),
    };
    let rebuilt = |d: &Derivation, premises: Vec<Derivation>| Derivation {
        conclusion: target.clone(),
        rule: d.rule,
        principal: d.principal.clone(),
        witness: d.witness.clone(),
        eigenvariable: d.eigenvariable.clone(),
        premises,
    };
    match d.rule {
        RuleId::Axiom => e.clone().weaken_to(&target),
        RuleId::Weakening => plug(&d.premises[0], a, e, fresh).weaken_to(&target),
        RuleId::OrE => {
            let Formula::Or(l, r) = d.premises[2].conclusion.sole_succedent().expect("single")
            else {
                unreachable!("checked")
            };
            let parts: Vec<Derivation> = d.premises.iter().map(|p| plug(p, a, e, fresh)).collect();
            let mut it = parts.into_iter();
            let first = it
                .next()
                .expect("three")
                .weaken_to(&single(&with(&ant, l), &goal));
            let second = it
                .next()
                .expect("three")
                .weaken_to(&single(&with(&ant, r), &goal));
            let major = it.next().expect("three").weaken_to(&single(
                &ant,
                d.premises[2].conclusion.sole_succedent().expect("single"),
            ));
            rebuilt(&d, vec![first, second, major])
        }
        RuleId::ExistsE => {
            let parts: Vec<Derivation> = d.premises.iter().map(|p| plug(p, a, e, fresh)).collect();
            let mut d2 = rebuilt(&d, parts);
            let major_ant = &d2.premises[0].conclusion.antecedent;
            let v = d2.eigenvariable.clone().expect("checked");
            let p = d2.premises[0]
                .conclusion
                .sole_succedent()
                .expect("single")
                .clone();
            let body = p.instantiate(&Term::Free(v)).expect("quantifier");
            let mut delta = d2.premises[1].conclusion.antecedent.clone();
            delta.remove(&body);
            let ant2: Set = major_ant.union(&delta).cloned().collect();
            d2.conclusion = single(&ant2, &goal);
            d2.weaken_to(&target)
        }
        _ => {
            let parts: Vec<Derivation> = d
                .premises
                .iter()
                .map(|p| {
                    let g = p.conclusion.sole_succedent().expect("single").clone();
                    plug(p, a, e, fresh).weaken_to(&single(&ant, &g))
                })
                .collect();
            rebuilt(&d, parts)
        }
    }
}
