use std::collections::BTreeSet;

use thiserror::Error;

use super::{Derivation, RuleId};
use crate::syntax::{CalculusId, Formula, Sequent, Term};

/// Why a single inference fails to match its rule schema.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("rule {rule} is not part of {calculus}")]
    RuleNotInCalculus { rule: RuleId, calculus: CalculusId },
    #[error("rule {rule} takes {expected} premise(s), found {found}")]
    Arity {
        rule: RuleId,
        expected: usize,
        found: usize,
    },
    #[error("succedent must hold exactly one formula: {0}")]
    SuccedentCardinality(String),
    #[error("quantified formula in a propositional calculus: {0}")]
    QuantifierInPropositional(String),
    #[error("missing {0}")]
    MissingAnnotation(&'static str),
    #[error("principal mismatch: {0}")]
    PrincipalMismatch(String),
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("eigenvariable condition violated: {0}")]
    Eigenvariable(String),
    #[error("bad witness: {0}")]
    Witness(String),
    #[error("{0} is not allowed here")]
    CutNotAllowed(RuleId),
}

/// First failing node in pre-order; `path` lists premise indices from the root.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("at {}: {violation}", render_path(.path))]
pub struct CheckFailure {
    pub path: Vec<usize>,
    pub violation: Violation,
}

fn render_path(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_owned()
    } else {
        let parts: Vec<String> = path.iter().map(usize::to_string).collect();
        format!("root/{}", parts.join("/"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub calculus: CalculusId,
    pub allow_cut: bool,
    /// Accept `CdAxiom` leaves (QGP extended by the constant domain schema).
    pub allow_cd: bool,
}

impl CheckOptions {
    pub fn new(calculus: CalculusId, allow_cut: bool) -> Self {
        CheckOptions {
            calculus,
            allow_cut,
            allow_cd: false,
        }
    }
}

pub fn check_derivation(
    d: &Derivation,
    calculus: CalculusId,
    allow_cut: bool,
) -> Result<(), CheckFailure> {
    check_derivation_with(d, CheckOptions::new(calculus, allow_cut))
}

pub fn check_derivation_with(d: &Derivation, opts: CheckOptions) -> Result<(), CheckFailure> {
    let mut path = Vec::new();
    walk(d, opts, &mut path)
}

fn walk(d: &Derivation, opts: CheckOptions, path: &mut Vec<usize>) -> Result<(), CheckFailure> {
    let fail = |path: &Vec<usize>, violation| CheckFailure {
        path: path.clone(),
        violation,
    };
    if !opts.allow_cut && matches!(d.rule, RuleId::Cut | RuleId::Trans) {
        return Err(fail(path, Violation::CutNotAllowed(d.rule)));
    }
    if d.rule == RuleId::CdAxiom && !opts.allow_cd {
        return Err(fail(path, Violation::CutNotAllowed(d.rule)));
    }
    let prems = d.premise_sequents();
    check_inference_inner(
        &d.conclusion,
        &prems,
        d.rule,
        d.principal.as_ref(),
        d.witness.as_ref(),
        d.eigenvariable.as_deref(),
        opts,
    )
    .map_err(|v| fail(path, v))?;
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        walk(p, opts, path)?;
        path.pop();
    }
    Ok(())
}

/// Checks one inference against the schema of `rule` in `calculus`, with
/// sets on both sides of the sequent (so contraction is implicit).
pub fn check_inference(
    conclusion: &Sequent,
    premises: &[&Sequent],
    rule: RuleId,
    principal: Option<&Formula>,
    witness: Option<&Term>,
    eigen: Option<&str>,
    calculus: CalculusId,
) -> Result<(), Violation> {
    let opts = CheckOptions {
        calculus,
        allow_cut: true,
        allow_cd: rule == RuleId::CdAxiom,
    };
    check_inference_inner(conclusion, premises, rule, principal, witness, eigen, opts)
}

type Check = Result<(), Violation>;
type Set = BTreeSet<Formula>;

fn rule_in_calculus(rule: RuleId, opts: CheckOptions) -> bool {
    let c = opts.calculus;
    if matches!(rule, RuleId::Axiom | RuleId::TopAxiom | RuleId::Weakening) {
        return true;
    }
    if rule == RuleId::CdAxiom {
        return opts.allow_cd && matches!(c, CalculusId::QGP | CalculusId::QGPW);
    }
    if rule.is_natural_deduction() != c.is_natural_deduction() {
        return false;
    }
    if matches!(rule, RuleId::OrL | RuleId::OrE) && c.weak_disjunction() {
        return false;
    }
    if rule.is_quantifier_rule() && !c.first_order() {
        return false;
    }
    true
}

fn check_inference_inner(
    c: &Sequent,
    prems: &[&Sequent],
    rule: RuleId,
    principal: Option<&Formula>,
    witness: Option<&Term>,
    eigen: Option<&str>,
    opts: CheckOptions,
) -> Check {
    let calc = opts.calculus;
    if !rule_in_calculus(rule, opts) {
        return Err(Violation::RuleNotInCalculus {
            rule,
            calculus: calc,
        });
    }
    if prems.len() != rule.arity() {
        return Err(Violation::Arity {
            rule,
            expected: rule.arity(),
            found: prems.len(),
        });
    }
    for s in std::iter::once(c).chain(prems.iter().copied()) {
        if calc.single_conclusion() && s.succedent.len() != 1 {
            return Err(Violation::SuccedentCardinality(s.to_string()));
        }
        if !calc.first_order() && s.has_quantifier() {
            return Err(Violation::QuantifierInPropositional(s.to_string()));
        }
    }
    let single = calc.single_conclusion();
    match rule {
        RuleId::Axiom => {
            let f = match (c.antecedent.iter().next(), c.antecedent.len()) {
                (Some(f), 1) => f,
                _ => {
                    return Err(Violation::ContextMismatch(format!(
                        "axiom must be `A => A`, got {c}"
                    )))
                }
            };
            if c.succedent.len() != 1 || !c.succedent.contains(f) {
                return Err(Violation::ContextMismatch(format!(
                    "axiom must be `A => A`, got {c}"
                )));
            }
            expect_principal(principal, f)
        }
        RuleId::TopAxiom => {
            if c.antecedent.is_empty()
                && c.succedent.len() == 1
                && c.succedent.contains(&Formula::Top)
            {
                Ok(())
            } else {
                Err(Violation::ContextMismatch(format!(
                    "expected `=> T`, got {c}"
                )))
            }
        }
        RuleId::CdAxiom => check_cd(c),
        RuleId::Weakening => {
            if prems[0].is_subsequent_of(c) {
                Ok(())
            } else {
                Err(Violation::ContextMismatch(format!(
                    "{} is not contained in {c}",
                    prems[0]
                )))
            }
        }
        RuleId::Cut => check_cut(c, prems, need(principal)?),
        RuleId::Trans => check_trans(c, prems, need(principal)?),
        RuleId::AndL => {
            let p = need(principal)?;
            let (l, r) = shape_and(p)?;
            left_rule(
                c,
                prems,
                p,
                &[(vec![l.clone(), r.clone()], c.succedent.clone())],
            )
        }
        RuleId::OrL => {
            let p = need(principal)?;
            let (l, r) = shape_or(p)?;
            left_rule(
                c,
                prems,
                p,
                &[
                    (vec![l.clone()], c.succedent.clone()),
                    (vec![r.clone()], c.succedent.clone()),
                ],
            )
        }
        RuleId::ImplL => {
            let p = need(principal)?;
            let (a, b) = shape_impl(p)?;
            if !prems[1].succedent.contains(a) {
                return Err(Violation::PrincipalMismatch(format!(
                    "second premise lacks {a} on the right"
                )));
            }
            let second_succ = if single {
                Set::from([a.clone()])
            } else {
                with(&c.succedent, [a.clone()])
            };
            left_rule(
                c,
                prems,
                p,
                &[
                    (vec![b.clone()], c.succedent.clone()),
                    (vec![], second_succ),
                ],
            )
        }
        RuleId::ForallL | RuleId::ExistsL => {
            let p = need(principal)?;
            let body = if rule == RuleId::ForallL {
                shape_forall(p)?;
                instance(p, need_witness(witness)?)
            } else {
                shape_exists(p)?;
                instance(p, &Term::Free(need_eigen(eigen)?.to_owned()))
            };
            left_rule(c, prems, p, &[(vec![body], c.succedent.clone())])?;
            if rule == RuleId::ExistsL {
                fresh_in(eigen.unwrap_or_default(), c.free_vars())?;
            }
            Ok(())
        }
        RuleId::AndR => {
            let p = right_principal(principal, c, single)?;
            let (l, r) = shape_and(p)?;
            right_rule(c, prems, p, &[vec![l.clone()], vec![r.clone()]])
        }
        RuleId::OrR => {
            let p = right_principal(principal, c, single)?;
            let (l, r) = shape_or(p)?;
            if single {
                let comp = if prems[0].succedent.contains(l) { l } else { r };
                right_rule(c, prems, p, &[vec![comp.clone()]])
            } else {
                right_rule(c, prems, p, &[vec![l.clone(), r.clone()]])
            }
        }
        RuleId::ImplRp => {
            let p = right_principal(principal, c, single)?;
            let (_, b) = shape_impl(p)?;
            right_rule(c, prems, p, &[vec![b.clone()]])
        }
        RuleId::ForallR | RuleId::ExistsR => {
            let p = right_principal(principal, c, single)?;
            let body = if rule == RuleId::ForallR {
                shape_forall(p)?;
                instance(p, &Term::Free(need_eigen(eigen)?.to_owned()))
            } else {
                shape_exists(p)?;
                instance(p, need_witness(witness)?)
            };
            right_rule(c, prems, p, &[vec![body]])?;
            if rule == RuleId::ForallR {
                fresh_in(eigen.unwrap_or_default(), c.free_vars())?;
            }
            Ok(())
        }
        _ => check_nd(c, prems, rule, principal, witness, eigen),
    }
}

fn check_nd(
    c: &Sequent,
    prems: &[&Sequent],
    rule: RuleId,
    principal: Option<&Formula>,
    witness: Option<&Term>,
    eigen: Option<&str>,
) -> Check {
    let goal = sole(c);
    let same_hyps = |i: usize| -> Check {
        if prems[i].antecedent == c.antecedent {
            Ok(())
        } else {
            Err(Violation::ContextMismatch(format!(
                "premise {} has hypotheses differing from the conclusion",
                i + 1
            )))
        }
    };
    let proves = |i: usize, f: &Formula| -> Check {
        if sole(prems[i]) == f {
            Ok(())
        } else {
            Err(Violation::PrincipalMismatch(format!(
                "premise {} should prove {f}",
                i + 1
            )))
        }
    };
    match rule {
        RuleId::AndE1 | RuleId::AndE2 => {
            let p = principal.unwrap_or(sole(prems[0]));
            let (l, r) = shape_and(p)?;
            proves(0, p)?;
            let comp = if rule == RuleId::AndE1 { l } else { r };
            if goal != comp {
                return Err(Violation::PrincipalMismatch(format!(
                    "conclusion should be {comp}"
                )));
            }
            same_hyps(0)
        }
        RuleId::AndI => {
            let p = right_nd_principal(principal, goal)?;
            let (l, r) = shape_and(p)?;
            proves(0, l)?;
            proves(1, r)?;
            same_hyps(0)?;
            same_hyps(1)
        }
        RuleId::OrI1 | RuleId::OrI2 => {
            let p = right_nd_principal(principal, goal)?;
            let (l, r) = shape_or(p)?;
            proves(0, if rule == RuleId::OrI1 { l } else { r })?;
            same_hyps(0)
        }
        RuleId::OrE => {
            let p = principal.unwrap_or(sole(prems[2]));
            let (l, r) = shape_or(p)?;
            proves(2, p)?;
            proves(0, goal)?;
            proves(1, goal)?;
            same_hyps(2)?;
            for (i, comp) in [(0, l), (1, r)] {
                if prems[i].antecedent != with(&c.antecedent, [comp.clone()]) {
                    return Err(Violation::ContextMismatch(format!(
                        "premise {} should have the hypotheses of the conclusion plus {comp}",
                        i + 1
                    )));
                }
            }
            Ok(())
        }
        RuleId::ImplE => {
            let p = principal.unwrap_or(sole(prems[1]));
            let (a, b) = shape_impl(p)?;
            proves(1, p)?;
            proves(0, a)?;
            if goal != b {
                return Err(Violation::PrincipalMismatch(format!(
                    "conclusion should be {b}"
                )));
            }
            same_hyps(0)?;
            same_hyps(1)
        }
        RuleId::ImplIW => {
            let p = right_nd_principal(principal, goal)?;
            let (_, b) = shape_impl(p)?;
            proves(0, b)?;
            same_hyps(0)
        }
        RuleId::ForallI => {
            let p = right_nd_principal(principal, goal)?;
            shape_forall(p)?;
            let a = need_eigen(eigen)?;
            proves(0, &instance(p, &Term::Free(a.to_owned())))?;
            same_hyps(0)?;
            fresh_in(a, c.free_vars())
        }
        RuleId::ForallE => {
            let p = principal.unwrap_or(sole(prems[0]));
            shape_forall(p)?;
            proves(0, p)?;
            let inst = instance(p, need_witness(witness)?);
            if goal != &inst {
                return Err(Violation::PrincipalMismatch(format!(
                    "conclusion should be {inst}"
                )));
            }
            same_hyps(0)
        }
        RuleId::ExistsI => {
            let p = right_nd_principal(principal, goal)?;
            shape_exists(p)?;
            proves(0, &instance(p, need_witness(witness)?))?;
            same_hyps(0)
        }
        RuleId::ExistsE => {
            let p = principal.unwrap_or(sole(prems[0]));
            shape_exists(p)?;
            let a = need_eigen(eigen)?;
            proves(0, p)?;
            let body = instance(p, &Term::Free(a.to_owned()));
            if !prems[1].antecedent.contains(&body) {
                return Err(Violation::PrincipalMismatch(format!(
                    "second premise lacks hypothesis {body}"
                )));
            }
            proves(1, goal)?;
            let gamma = &prems[0].antecedent;
            let mut last = Violation::ContextMismatch(format!(
                "hypotheses should be those of both premises, without {body}"
            ));
            for delta in options(&prems[1].antecedent, &body) {
                if union(gamma, &delta) != c.antecedent {
                    continue;
                }
                let mut fv: BTreeSet<String> = gamma
                    .iter()
                    .chain(delta.iter())
                    .flat_map(Formula::free_vars)
                    .collect();
                fv.extend(goal.free_vars());
                fv.extend(p.free_vars());
                match fresh_in(a, fv) {
                    Ok(()) => return Ok(()),
                    Err(e) => last = e,
                }
            }
            Err(last)
        }
        _ => unreachable!("sequent rules are handled by the caller"),
    }
}

fn check_cut(c: &Sequent, prems: &[&Sequent], phi: &Formula) -> Check {
    let (p1, p2) = (prems[0], prems[1]);
    if !p1.succedent.contains(phi) {
        return Err(Violation::PrincipalMismatch(format!(
            "left premise does not prove {phi}"
        )));
    }
    if !p2.antecedent.contains(phi) {
        return Err(Violation::PrincipalMismatch(format!(
            "right premise does not assume {phi}"
        )));
    }
    let ant_ok = options(&p2.antecedent, phi)
        .iter()
        .any(|g1| union(&p1.antecedent, g1) == c.antecedent);
    let succ_ok = options(&p1.succedent, phi)
        .iter()
        .any(|d| union(d, &p2.succedent) == c.succedent);
    if ant_ok && succ_ok {
        Ok(())
    } else {
        Err(Violation::ContextMismatch(format!(
            "cut on {phi} does not yield {c}"
        )))
    }
}

fn check_trans(c: &Sequent, prems: &[&Sequent], phi: &Formula) -> Check {
    if sole(prems[0]) != phi {
        return Err(Violation::PrincipalMismatch(format!(
            "first premise should prove {phi}"
        )));
    }
    if !prems[1].antecedent.contains(phi) {
        return Err(Violation::PrincipalMismatch(format!(
            "second premise should assume {phi}"
        )));
    }
    if prems[0].antecedent != c.antecedent
        || prems[1].antecedent != with(&c.antecedent, [phi.clone()])
        || prems[1].succedent != c.succedent
    {
        return Err(Violation::ContextMismatch(format!(
            "transitivity through {phi} does not yield {c}"
        )));
    }
    Ok(())
}

// forall x (d | A(x)) => d | forall x A(x), with x not loose in d.
fn check_cd(c: &Sequent) -> Check {
    let bad = || Violation::ContextMismatch(format!("not a constant domain instance: {c}"));
    let (Some(lhs), Some(rhs)) = (c.antecedent.iter().next(), sole_opt(c)) else {
        return Err(bad());
    };
    if c.antecedent.len() != 1 {
        return Err(bad());
    }
    let Formula::Forall(x, body) = lhs else {
        return Err(bad());
    };
    let Formula::Or(d, a) = body.as_ref() else {
        return Err(bad());
    };
    if d.loose_bound_vars().contains(x) {
        return Err(bad());
    }
    let expected = Formula::or((**d).clone(), Formula::Forall(x.clone(), a.clone()));
    if rhs == &expected {
        Ok(())
    } else {
        Err(bad())
    }
}

/// Left rule: each premise is `G, adds_i => succ_i` for one shared retained
/// context `G`, which is the conclusion's antecedent with or without the
/// principal formula.
fn left_rule(c: &Sequent, prems: &[&Sequent], p: &Formula, specs: &[(Vec<Formula>, Set)]) -> Check {
    if !c.antecedent.contains(p) {
        return Err(Violation::PrincipalMismatch(format!(
            "{p} is not in the antecedent of {c}"
        )));
    }
    for (i, (adds, succ)) in specs.iter().enumerate() {
        if let Some(a) = adds.iter().find(|a| !prems[i].antecedent.contains(a)) {
            return Err(Violation::PrincipalMismatch(format!(
                "premise {} lacks {a} on the left",
                i + 1
            )));
        }
        if &prems[i].succedent != succ {
            return Err(Violation::ContextMismatch(format!(
                "premise {} has the wrong succedent",
                i + 1
            )));
        }
    }
    let ok = options(&c.antecedent, p).iter().any(|g| {
        specs
            .iter()
            .enumerate()
            .all(|(i, (adds, _))| with(g, adds.iter().cloned()) == prems[i].antecedent)
    });
    if ok {
        Ok(())
    } else {
        Err(Violation::ContextMismatch(format!(
            "antecedents of the premises do not match {c}"
        )))
    }
}

/// Right rule: each premise is `Gamma => D, adds_i` for one shared retained
/// succedent `D`.
fn right_rule(c: &Sequent, prems: &[&Sequent], p: &Formula, specs: &[Vec<Formula>]) -> Check {
    for (i, adds) in specs.iter().enumerate() {
        if let Some(a) = adds.iter().find(|a| !prems[i].succedent.contains(a)) {
            return Err(Violation::PrincipalMismatch(format!(
                "premise {} lacks {a} on the right",
                i + 1
            )));
        }
        if prems[i].antecedent != c.antecedent {
            return Err(Violation::ContextMismatch(format!(
                "premise {} has the wrong antecedent",
                i + 1
            )));
        }
    }
    let ok = options(&c.succedent, p).iter().any(|d| {
        specs
            .iter()
            .enumerate()
            .all(|(i, adds)| with(d, adds.iter().cloned()) == prems[i].succedent)
    });
    if ok {
        Ok(())
    } else {
        Err(Violation::ContextMismatch(format!(
            "succedents of the premises do not match {c}"
        )))
    }
}

fn right_principal<'a>(
    principal: Option<&'a Formula>,
    c: &'a Sequent,
    single: bool,
) -> Result<&'a Formula, Violation> {
    let p = match principal {
        Some(p) => p,
        None if single => sole(c),
        None => return Err(Violation::MissingAnnotation("principal formula")),
    };
    if c.succedent.contains(p) {
        Ok(p)
    } else {
        Err(Violation::PrincipalMismatch(format!(
            "{p} is not in the succedent of {c}"
        )))
    }
}

fn right_nd_principal<'a>(
    principal: Option<&'a Formula>,
    goal: &'a Formula,
) -> Result<&'a Formula, Violation> {
    match principal {
        Some(p) if p != goal => Err(Violation::PrincipalMismatch(format!(
            "{p} is not the conclusion {goal}"
        ))),
        _ => Ok(goal),
    }
}

fn expect_principal(principal: Option<&Formula>, f: &Formula) -> Check {
    match principal {
        Some(p) if p != f => Err(Violation::PrincipalMismatch(format!("{p} is not {f}"))),
        _ => Ok(()),
    }
}

fn need(principal: Option<&Formula>) -> Result<&Formula, Violation> {
    principal.ok_or(Violation::MissingAnnotation("principal formula"))
}

fn need_witness(w: Option<&Term>) -> Result<&Term, Violation> {
    match w {
        None => Err(Violation::MissingAnnotation("witness term")),
        Some(Term::Bound(n)) => Err(Violation::Witness(format!("{n} is a bound variable"))),
        Some(t) => Ok(t),
    }
}

fn need_eigen(a: Option<&str>) -> Result<&str, Violation> {
    match a {
        None => Err(Violation::MissingAnnotation("eigenvariable")),
        Some("") => Err(Violation::Eigenvariable("empty name".into())),
        Some(a) => Ok(a),
    }
}

fn fresh_in(a: &str, fv: BTreeSet<String>) -> Check {
    if fv.contains(a) {
        Err(Violation::Eigenvariable(format!(
            "{a} occurs free in the conclusion"
        )))
    } else {
        Ok(())
    }
}

fn shape_and(p: &Formula) -> Result<(&Formula, &Formula), Violation> {
    match p {
        Formula::And(l, r) => Ok((l, r)),
        _ => Err(Violation::PrincipalMismatch(format!(
            "{p} is not a conjunction"
        ))),
    }
}

fn shape_or(p: &Formula) -> Result<(&Formula, &Formula), Violation> {
    match p {
        Formula::Or(l, r) => Ok((l, r)),
        _ => Err(Violation::PrincipalMismatch(format!(
            "{p} is not a disjunction"
        ))),
    }
}

fn shape_impl(p: &Formula) -> Result<(&Formula, &Formula), Violation> {
    match p {
        Formula::Impl(l, r) => Ok((l, r)),
        _ => Err(Violation::PrincipalMismatch(format!(
            "{p} is not an implication"
        ))),
    }
}

fn shape_forall(p: &Formula) -> Check {
    match p {
        Formula::Forall(..) => Ok(()),
        _ => Err(Violation::PrincipalMismatch(format!(
            "{p} is not universal"
        ))),
    }
}

fn shape_exists(p: &Formula) -> Check {
    match p {
        Formula::Exists(..) => Ok(()),
        _ => Err(Violation::PrincipalMismatch(format!(
            "{p} is not existential"
        ))),
    }
}

fn instance(p: &Formula, t: &Term) -> Formula {
    p.instantiate(t).expect("quantified formula")
}

fn sole(s: &Sequent) -> &Formula {
    sole_opt(s).expect("cardinality checked")
}

fn sole_opt(s: &Sequent) -> Option<&Formula> {
    s.sole_succedent()
}

/// Retained context: the side without `p`, and the side itself (implicit
/// contraction keeps the principal formula).
fn options(side: &Set, p: &Formula) -> Vec<Set> {
    if side.contains(p) {
        let mut without = side.clone();
        without.remove(p);
        vec![without, side.clone()]
    } else {
        vec![side.clone()]
    }
}

fn with(base: &Set, extra: impl IntoIterator<Item = Formula>) -> Set {
    let mut out = base.clone();
    out.extend(extra);
    out
}

fn union(a: &Set, b: &Set) -> Set {
    a.union(b).cloned().collect()
}
