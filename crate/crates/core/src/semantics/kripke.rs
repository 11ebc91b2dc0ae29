use std::collections::{BTreeMap, BTreeSet};

use super::{
    assignments, elements, ground, stratified, EvalError, ModelViolation, QuasiBooleanModel,
};
use crate::syntax::{Formula, Sequent, Term, TermStyle};

/// `<W, <=, D, v>` with finite worlds and domains. `order` lists the pairs
/// `(u, v)` with `u <= v`; it is expected to be reflexive and transitive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KripkeModel {
    pub worlds: BTreeSet<String>,
    pub order: BTreeSet<(String, String)>,
    pub domains: BTreeMap<String, BTreeSet<String>>,
    pub const_interp: BTreeMap<String, String>,
    pub valuation: BTreeMap<(String, Formula), bool>,
    pub wd_mode: bool,
}

impl KripkeModel {
    /// The one-world model agreeing with `m` on every closed formula.
    pub fn from_qb(m: &QuasiBooleanModel, world: &str) -> Self {
        let w = world.to_owned();
        KripkeModel {
            worlds: BTreeSet::from([w.clone()]),
            order: BTreeSet::from([(w.clone(), w.clone())]),
            domains: BTreeMap::from([(w.clone(), m.domain.clone())]),
            const_interp: m.const_interp.clone(),
            valuation: m
                .valuation
                .iter()
                .map(|(k, v)| ((w.clone(), k.clone()), *v))
                .collect(),
            wd_mode: m.wd_mode,
        }
    }

    pub fn leq(&self, u: &str, v: &str) -> bool {
        self.order.contains(&(u.to_owned(), v.to_owned()))
    }

    /// Worlds `v` with `u <= v`, in name order.
    pub fn above<'a>(&'a self, u: &'a str) -> impl Iterator<Item = &'a String> + 'a {
        self.worlds.iter().filter(move |v| self.leq(u, v))
    }

    pub fn domain(&self, u: &str) -> Result<&BTreeSet<String>, EvalError> {
        self.domains
            .get(u)
            .ok_or_else(|| EvalError::UnknownWorld(u.to_owned()))
    }

    /// Element denoted by constant `c`: its interpretation, or `c` itself
    /// when it names an element of some domain.
    pub fn element_of(&self, c: &str) -> Option<String> {
        match self.const_interp.get(c) {
            Some(e) => Some(e.clone()),
            None if self.domains.values().any(|d| d.contains(c)) => Some(c.to_owned()),
            None => None,
        }
    }

    pub fn ground(
        &self,
        f: &Formula,
        assignment: &BTreeMap<String, String>,
    ) -> Result<Formula, EvalError> {
        ground(f, &|c| self.element_of(c), assignment)
    }

    fn lookup(&self, u: &str, key: &Formula) -> Result<bool, EvalError> {
        self.valuation
            .get(&(u.to_owned(), key.clone()))
            .copied()
            .ok_or_else(|| EvalError::MissingKey {
                key: key.to_text(TermStyle::Bare),
                world: Some(u.to_owned()),
            })
    }

    /// Forcing of a ground formula whose elements lie in `D(u)`.
    pub(crate) fn force(&self, u: &str, f: &Formula) -> Result<bool, EvalError> {
        let dom = self.domain(u)?;
        if let Some(e) = elements(f).into_iter().find(|e| !dom.contains(e)) {
            return Err(EvalError::OutsideDomain {
                element: e,
                world: Some(u.to_owned()),
            });
        }
        self.force_in(u, f)
    }

    fn force_in(&self, u: &str, f: &Formula) -> Result<bool, EvalError> {
        match f {
            Formula::Top => Ok(true),
            Formula::Atom { .. } | Formula::Impl(..) => self.lookup(u, f),
            Formula::And(l, r) => {
                let (a, b) = (self.force_in(u, l)?, self.force_in(u, r)?);
                Ok(a && b)
            }
            Formula::Or(l, r) => {
                let (a, b) = (self.force_in(u, l)?, self.force_in(u, r)?);
                if self.wd_mode {
                    self.lookup(u, f)
                } else {
                    Ok(a || b)
                }
            }
            Formula::Forall(..) => {
                let mut all = true;
                for v in self.above(u) {
                    for e in self.domain(v)? {
                        all &= self.force_in(
                            v,
                            &f.instantiate(&Term::Const(e.clone())).expect("quantifier"),
                        )?;
                    }
                }
                Ok(all)
            }
            Formula::Exists(..) => {
                let mut any = false;
                for e in self.domain(u)? {
                    any |= self.force_in(
                        u,
                        &f.instantiate(&Term::Const(e.clone())).expect("quantifier"),
                    )?;
                }
                Ok(any)
            }
        }
    }

    pub fn force_with(
        &self,
        u: &str,
        f: &Formula,
        assignment: &BTreeMap<String, String>,
    ) -> Result<bool, EvalError> {
        self.force(u, &self.ground(f, assignment)?)
    }
}

/// `W, u |= f` for a closed formula.
pub fn eval_kripke(m: &KripkeModel, u: &str, f: &Formula) -> Result<bool, EvalError> {
    if !m.worlds.contains(u) {
        return Err(EvalError::UnknownWorld(u.to_owned()));
    }
    m.force_with(u, f, &BTreeMap::new())
}

/// All violated model conditions; empty iff the model is well formed.
pub fn check_kripke_model(m: &KripkeModel) -> Vec<ModelViolation> {
    let mut out = Vec::new();
    check_frame(m, &mut out);
    if !out.is_empty() {
        return out;
    }
    for (u, v) in &m.order {
        if let Some(e) = m.domains[u].iter().find(|e| !m.domains[v].contains(*e)) {
            out.push(ModelViolation::DomainNotMonotone {
                lower: u.clone(),
                upper: v.clone(),
                element: e.clone(),
            });
        }
    }
    for (c, e) in &m.const_interp {
        for (w, d) in &m.domains {
            if !d.contains(e) {
                out.push(ModelViolation::ForeignElement {
                    world: Some(w.clone()),
                    key: Formula::atom("const", vec![Term::constant(c.clone())]),
                    element: e.clone(),
                });
            }
        }
    }
    let mut foreign = BTreeSet::new();
    for ((w, key), value) in &m.valuation {
        if !m.worlds.contains(w) {
            out.push(ModelViolation::UnknownWorld(w.clone()));
            foreign.insert((w.clone(), key.clone()));
            continue;
        }
        if let Some(e) = elements(key)
            .into_iter()
            .find(|e| !m.domains[w].contains(e))
        {
            out.push(ModelViolation::ForeignElement {
                world: Some(w.clone()),
                key: key.clone(),
                element: e,
            });
            foreign.insert((w.clone(), key.clone()));
            continue;
        }
        if *value {
            for v in m.above(w) {
                if v != w && m.valuation.get(&(v.clone(), key.clone())) != Some(&true) {
                    out.push(ModelViolation::ValuationNotMonotone {
                        lower: w.clone(),
                        upper: v.clone(),
                        key: key.clone(),
                    });
                }
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let keys: BTreeSet<&Formula> = m.valuation.keys().map(|(_, k)| k).collect();
    for key in stratified(keys.into_iter()) {
        for u in &m.worlds {
            let Some(&value) = m.valuation.get(&(u.clone(), key.clone())) else {
                continue;
            };
            let viol = |error| ModelViolation::Eval {
                world: Some(u.clone()),
                key: key.clone(),
                error,
            };
            match key {
                Formula::Impl(a, b) => {
                    match m.force(u, b) {
                        Ok(true) if !value => out.push(ModelViolation::Condition1 {
                            world: Some(u.clone()),
                            key: key.clone(),
                        }),
                        Ok(_) => {}
                        Err(e) => out.push(viol(e)),
                    }
                    if value {
                        for v in m.above(u) {
                            match (m.force(v, a), m.force(v, b)) {
                                (Ok(true), Ok(false)) => {
                                    out.push(ModelViolation::Condition2 {
                                        world: Some(u.clone()),
                                        key: key.clone(),
                                        witness: Some(v.clone()),
                                    });
                                    break;
                                }
                                (Err(e), _) | (_, Err(e)) => {
                                    out.push(viol(e));
                                    break;
                                }
                                _ => {}
                            }
                        }
                    }
                }
                Formula::Or(a, b) if m.wd_mode => match (m.force(u, a), m.force(u, b)) {
                    (Ok(x), Ok(y)) => {
                        if (x || y) && !value {
                            out.push(ModelViolation::Disjunction {
                                world: Some(u.clone()),
                                key: key.clone(),
                            });
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => out.push(viol(e)),
                },
                _ => {}
            }
        }
    }
    out
}

fn check_frame(m: &KripkeModel, out: &mut Vec<ModelViolation>) {
    if m.worlds.is_empty() {
        out.push(ModelViolation::EmptyDomain { world: None });
    }
    for (u, v) in &m.order {
        for w in [u, v] {
            if !m.worlds.contains(w) {
                out.push(ModelViolation::UnknownWorld(w.clone()));
            }
        }
    }
    for w in m.domains.keys() {
        if !m.worlds.contains(w) {
            out.push(ModelViolation::UnknownWorld(w.clone()));
        }
    }
    for w in &m.worlds {
        if !m.leq(w, w) {
            out.push(ModelViolation::NotReflexive(w.clone()));
        }
        if m.domains.get(w).is_none_or(BTreeSet::is_empty) {
            out.push(ModelViolation::EmptyDomain {
                world: Some(w.clone()),
            });
        }
    }
    for (u, v) in &m.order {
        if u != v && m.leq(v, u) && u < v {
            out.push(ModelViolation::NotAntisymmetric(u.clone(), v.clone()));
        }
        for w in &m.worlds {
            if m.leq(v, w) && !m.leq(u, w) {
                out.push(ModelViolation::NotTransitive(
                    u.clone(),
                    v.clone(),
                    w.clone(),
                ));
            }
        }
    }
}

/// At every world and every assignment over that world's domain, forcing
/// the antecedent forces the single succedent formula.
pub fn sequent_valid_kripke(m: &KripkeModel, s: &Sequent) -> Result<bool, EvalError> {
    Ok(kripke_counter_assignment(m, s)?.is_none())
}

/// A world and an assignment of free variables.
pub type WorldAssignment = (String, BTreeMap<String, String>);

/// A world and assignment falsifying `s`, if any.
pub fn kripke_counter_assignment(
    m: &KripkeModel,
    s: &Sequent,
) -> Result<Option<WorldAssignment>, EvalError> {
    let goal = s.sole_succedent().ok_or(EvalError::NotSingleSuccedent)?;
    let vars = s.free_vars();
    for u in &m.worlds {
        for a in assignments(&vars, m.domain(u)?) {
            let mut lhs = true;
            for f in &s.antecedent {
                lhs &= m.force_with(u, f, &a)?;
            }
            if lhs && !m.force_with(u, goal, &a)? {
                return Ok(Some((u.clone(), a)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_sequent};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn b(e: &str) -> Formula {
        Formula::atom("B", vec![Term::constant(e)])
    }

    /// u < v, D(u) = {c}, D(v) = {c, d}; B(c) at both, A only at v.
    fn cd_counter() -> KripkeModel {
        let mut m = KripkeModel::default();
        for w in ["u", "v"] {
            m.worlds.insert(w.into());
            m.order.insert((w.into(), w.into()));
        }
        m.order.insert(("u".into(), "v".into()));
        m.domains.insert("u".into(), BTreeSet::from(["c".into()]));
        m.domains
            .insert("v".into(), BTreeSet::from(["c".into(), "d".into()]));
        for (w, k, val) in [
            ("u", f("A"), false),
            ("v", f("A"), true),
            ("u", b("c"), true),
            ("v", b("c"), true),
            ("v", b("d"), false),
        ] {
            m.valuation.insert((w.into(), k), val);
        }
        m
    }

    #[test]
    fn constant_domain_fails() {
        let m = cd_counter();
        assert!(check_kripke_model(&m).is_empty());
        assert_eq!(eval_kripke(&m, "u", &f("forall x. A | B(x)")), Ok(true));
        assert_eq!(eval_kripke(&m, "u", &f("A | forall x. B(x)")), Ok(false));
        let cd = parse_sequent("forall x. A | B(x) => A | forall x. B(x)").unwrap();
        assert_eq!(sequent_valid_kripke(&m, &cd), Ok(false));
    }

    #[test]
    fn monotonicity_violations() {
        let mut m = cd_counter();
        m.domains.insert("v".into(), BTreeSet::from(["d".into()]));
        assert!(check_kripke_model(&m)
            .iter()
            .any(|v| matches!(v, ModelViolation::DomainNotMonotone { .. })));
        let mut m = cd_counter();
        m.valuation.insert(("v".into(), b("c")), false);
        assert!(check_kripke_model(&m)
            .iter()
            .any(|v| matches!(v, ModelViolation::ValuationNotMonotone { .. })));
    }

    #[test]
    fn one_world_exists() {
        let mut m = QuasiBooleanModel::new(["c"]);
        m.set(Formula::atom("P", vec![Term::constant("c")]), true);
        let k = KripkeModel::from_qb(&m, "w");
        assert!(check_kripke_model(&k).is_empty());
        assert_eq!(eval_kripke(&k, "w", &f("exists x. P(x)")), Ok(true));
    }
}
