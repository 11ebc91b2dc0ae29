use std::collections::{BTreeMap, BTreeSet};

use super::{assignments, elements, ground, stratified, EvalError, ModelViolation};
use crate::syntax::{Formula, Sequent, Term};

/// `(M, v)`: a non-empty domain and a 0/1 valuation of ground atoms and
/// implications. In `wd_mode` disjunctions are valuation keys too.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuasiBooleanModel {
    pub domain: BTreeSet<String>,
    pub const_interp: BTreeMap<String, String>,
    pub valuation: BTreeMap<Formula, bool>,
    pub wd_mode: bool,
}

impl QuasiBooleanModel {
    pub fn new(domain: impl IntoIterator<Item = impl Into<String>>) -> Self {
        QuasiBooleanModel {
            domain: domain.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: Formula, value: bool) -> &mut Self {
        self.valuation.insert(key, value);
        self
    }

    /// Element denoted by constant `c`: its interpretation, or `c` itself
    /// when it names a domain element.
    pub fn element_of(&self, c: &str) -> Option<String> {
        match self.const_interp.get(c) {
            Some(e) => Some(e.clone()),
            None if self.domain.contains(c) => Some(c.to_owned()),
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

    fn lookup(&self, key: &Formula) -> Result<bool, EvalError> {
        if let Some(e) = elements(key).into_iter().find(|e| !self.domain.contains(e)) {
            return Err(EvalError::OutsideDomain {
                element: e,
                world: None,
            });
        }
        self.valuation
            .get(key)
            .copied()
            .ok_or_else(|| EvalError::MissingKey {
                key: key.to_text(crate::syntax::TermStyle::Bare),
                world: None,
            })
    }

    /// Truth of a ground formula.
    pub(crate) fn eval_ground(&self, f: &Formula) -> Result<bool, EvalError> {
        match f {
            Formula::Top => Ok(true),
            Formula::Atom { .. } | Formula::Impl(..) => self.lookup(f),
            Formula::And(l, r) => {
                let (a, b) = (self.eval_ground(l)?, self.eval_ground(r)?);
                Ok(a && b)
            }
            Formula::Or(l, r) => {
                let (a, b) = (self.eval_ground(l)?, self.eval_ground(r)?);
                if self.wd_mode {
                    self.lookup(f)
                } else {
                    Ok(a || b)
                }
            }
            Formula::Forall(..) | Formula::Exists(..) => {
                let universal = matches!(f, Formula::Forall(..));
                let mut acc = universal;
                for e in &self.domain {
                    let v = self.eval_ground(
                        &f.instantiate(&Term::Const(e.clone())).expect("quantifier"),
                    )?;
                    acc = if universal { acc && v } else { acc || v };
                }
                Ok(acc)
            }
        }
    }

    /// Truth of `f` with free variables read from `assignment`.
    pub fn eval_with(
        &self,
        f: &Formula,
        assignment: &BTreeMap<String, String>,
    ) -> Result<bool, EvalError> {
        self.eval_ground(&self.ground(f, assignment)?)
    }
}

/// Truth of a closed formula in a quasi-boolean model.
pub fn eval_qb(m: &QuasiBooleanModel, f: &Formula) -> Result<bool, EvalError> {
    m.eval_with(f, &BTreeMap::new())
}

/// All violated model conditions; empty iff the model is well formed.
pub fn check_qb_valuation(m: &QuasiBooleanModel) -> Vec<ModelViolation> {
    let mut out = Vec::new();
    if m.domain.is_empty() {
        out.push(ModelViolation::EmptyDomain { world: None });
    }
    for (c, e) in &m.const_interp {
        if !m.domain.contains(e) {
            out.push(ModelViolation::ForeignElement {
                world: None,
                key: Formula::atom("const", vec![Term::constant(c.clone())]),
                element: e.clone(),
            });
        }
    }
    for key in stratified(m.valuation.keys()) {
        if let Some(e) = elements(key).into_iter().find(|e| !m.domain.contains(e)) {
            out.push(ModelViolation::ForeignElement {
                world: None,
                key: key.clone(),
                element: e,
            });
            continue;
        }
        let value = m.valuation[key];
        let eval = |f: &Formula| {
            m.eval_ground(f).map_err(|error| ModelViolation::Eval {
                world: None,
                key: key.clone(),
                error,
            })
        };
        match key {
            Formula::Impl(a, b) => {
                let fb = match eval(b) {
                    Ok(x) => x,
                    Err(v) => {
                        out.push(v);
                        continue;
                    }
                };
                if fb && !value {
                    out.push(ModelViolation::Condition1 {
                        world: None,
                        key: key.clone(),
                    });
                }
                if value && !fb {
                    match eval(a) {
                        Ok(true) => out.push(ModelViolation::Condition2 {
                            world: None,
                            key: key.clone(),
                            witness: None,
                        }),
                        Ok(false) => {}
                        Err(v) => out.push(v),
                    }
                }
            }
            Formula::Or(a, b) if m.wd_mode => match (eval(a), eval(b)) {
                (Ok(x), Ok(y)) => {
                    if (x || y) && !value {
                        out.push(ModelViolation::Disjunction {
                            world: None,
                            key: key.clone(),
                        });
                    }
                }
                (Err(v), _) | (_, Err(v)) => out.push(v),
            },
            _ => {}
        }
    }
    out
}

/// Every assignment of elements to the free variables of `s` that makes all
/// of the antecedent true makes some succedent formula true.
pub fn sequent_valid_qb(m: &QuasiBooleanModel, s: &Sequent) -> Result<bool, EvalError> {
    Ok(qb_counter_assignment(m, s)?.is_none())
}

/// An assignment falsifying `s`, if any.
pub fn qb_counter_assignment(
    m: &QuasiBooleanModel,
    s: &Sequent,
) -> Result<Option<BTreeMap<String, String>>, EvalError> {
    for a in assignments(&s.free_vars(), &m.domain) {
        let mut lhs = true;
        for f in &s.antecedent {
            lhs &= m.eval_with(f, &a)?;
        }
        let mut rhs = false;
        for f in &s.succedent {
            rhs |= m.eval_with(f, &a)?;
        }
        if lhs && !rhs {
            return Ok(Some(a));
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

    fn el(name: &str) -> Term {
        Term::constant(name)
    }

    #[test]
    fn singleton_forall() {
        let mut m = QuasiBooleanModel::new(["u"]);
        m.set(Formula::atom("P", vec![el("u")]), true);
        assert_eq!(eval_qb(&m, &f("forall x. P(x)")), Ok(true));
    }

    #[test]
    fn refuting_p_implies_p() {
        let mut m = QuasiBooleanModel::new(["u"]);
        m.set(f("p"), false).set(f("p -> p"), false);
        assert!(check_qb_valuation(&m).is_empty());
        assert_eq!(eval_qb(&m, &f("p -> p")), Ok(false));
        assert_eq!(
            sequent_valid_qb(&m, &parse_sequent("=> p -> p").unwrap()),
            Ok(false)
        );
        assert_eq!(
            sequent_valid_qb(&m, &parse_sequent("p =>").unwrap()),
            Ok(true)
        );
    }

    #[test]
    fn constant_domain_holds() {
        let mut m = QuasiBooleanModel::new(["u"]);
        m.set(f("A"), false)
            .set(Formula::atom("B", vec![el("u")]), true);
        assert_eq!(eval_qb(&m, &f("forall x. A | B(x)")), Ok(true));
        assert_eq!(eval_qb(&m, &f("A | forall x. B(x)")), Ok(true));
    }

    #[test]
    fn conditions() {
        let mut m = QuasiBooleanModel::new(["u"]);
        m.set(f("q"), true).set(f("p -> q"), false);
        assert!(matches!(
            check_qb_valuation(&m)[..],
            [ModelViolation::Condition1 { .. }]
        ));
        let mut m = QuasiBooleanModel::new(["u"]);
        m.set(f("p"), true)
            .set(f("q"), false)
            .set(f("p -> q"), true);
        assert!(matches!(
            check_qb_valuation(&m)[..],
            [ModelViolation::Condition2 { .. }]
        ));
        assert!(check_qb_valuation(&QuasiBooleanModel::new(["u"])).is_empty());
    }

    #[test]
    fn missing_key_is_an_error() {
        let m = QuasiBooleanModel::new(["u"]);
        assert!(matches!(
            eval_qb(&m, &f("p")),
            Err(EvalError::MissingKey { .. })
        ));
        assert!(matches!(
            eval_qb(&m, &f("P(c1)")),
            Err(EvalError::Uninterpreted(_))
        ));
    }
}
