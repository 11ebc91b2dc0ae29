//! Quasi-boolean and Kripke models: well-formedness, forcing and validity.
//!
//! Models talk about domain elements by name. Formulas are evaluated after
//! grounding: constants are replaced by their interpretation and free
//! variables by assigned elements, both written as `Term::Const(element)`.
//! Valuation keys are ground atoms and implications (plus disjunctions in
//! weak-disjunction mode); a key missing from the valuation is an error,
//! never an implicit 0.

mod file;
mod kripke;
mod qb;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{Formula, Term};

pub use file::{parse_model, ModelFile, ModelParseError};
pub use kripke::{
    check_kripke_model, eval_kripke, kripke_counter_assignment, sequent_valid_kripke, KripkeModel,
    WorldAssignment,
};
pub use qb::{
    check_qb_valuation, eval_qb, qb_counter_assignment, sequent_valid_qb, QuasiBooleanModel,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("constant `{0}` has no interpretation")]
    Uninterpreted(String),
    #[error("free variable `{0}` has no value")]
    Unassigned(String),
    #[error("element `{element}` is not in the domain{}", at(.world))]
    OutsideDomain {
        element: String,
        world: Option<String>,
    },
    #[error("no valuation for {key}{}", at(.world))]
    MissingKey { key: String, world: Option<String> },
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("Kripke validity needs exactly one succedent formula")]
    NotSingleSuccedent,
}

fn at(world: &Option<String>) -> String {
    world
        .as_ref()
        .map(|w| format!(" at world {w}"))
        .unwrap_or_default()
}

/// A failed well-formedness condition of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelViolation {
    EmptyDomain {
        world: Option<String>,
    },
    UnknownWorld(String),
    NotReflexive(String),
    NotAntisymmetric(String, String),
    NotTransitive(String, String, String),
    DomainNotMonotone {
        lower: String,
        upper: String,
        element: String,
    },
    ValuationNotMonotone {
        lower: String,
        upper: String,
        key: Formula,
    },
    ForeignElement {
        world: Option<String>,
        key: Formula,
        element: String,
    },
    /// `|= psi` but `v(phi -> psi) = 0`.
    Condition1 {
        world: Option<String>,
        key: Formula,
    },
    /// `v(phi -> psi) = 1`, `|= phi` and not `|= psi` (at `witness` for Kripke models).
    Condition2 {
        world: Option<String>,
        key: Formula,
        witness: Option<String>,
    },
    /// A disjunct holds but the stored disjunction is 0.
    Disjunction {
        world: Option<String>,
        key: Formula,
    },
    Eval {
        world: Option<String>,
        key: Formula,
        error: EvalError,
    },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ModelViolation::*;
        let k = |key: &Formula| key.to_text(crate::syntax::TermStyle::Bare);
        match self {
            EmptyDomain { world } => write!(f, "empty domain{}", at(world)),
            UnknownWorld(w) => write!(f, "unknown world `{w}`"),
            NotReflexive(w) => write!(f, "order is not reflexive at {w}"),
            NotAntisymmetric(u, v) => write!(f, "order is not antisymmetric: {u} <= {v} <= {u}"),
            NotTransitive(u, v, w) => write!(f, "order is not transitive: {u} <= {v} <= {w}"),
            DomainNotMonotone {
                lower,
                upper,
                element,
            } => {
                write!(
                    f,
                    "domain monotonicity: {element} in D({lower}) but not in D({upper})"
                )
            }
            ValuationNotMonotone { lower, upper, key } => {
                write!(
                    f,
                    "valuation monotonicity: {} true at {lower} but not at {upper}",
                    k(key)
                )
            }
            ForeignElement {
                world,
                key,
                element,
            } => {
                write!(
                    f,
                    "key {} mentions {element}, outside the domain{}",
                    k(key),
                    at(world)
                )
            }
            Condition1 { world, key } => write!(f, "condition 1 fails at {}{}", k(key), at(world)),
            Condition2 {
                world,
                key,
                witness,
            } => {
                write!(f, "condition 2 fails at {}{}", k(key), at(world))?;
                match witness {
                    Some(w) => write!(f, " (witnessed at {w})"),
                    None => Ok(()),
                }
            }
            Disjunction { world, key } => {
                write!(f, "disjunction condition fails at {}{}", k(key), at(world))
            }
            Eval { world, key, error } => {
                write!(f, "cannot evaluate {}{}: {error}", k(key), at(world))
            }
        }
    }
}

/// Replaces constants by their elements and free variables by assigned
/// elements. Bound variables are untouched.
pub(crate) fn ground(
    f: &Formula,
    interp: &dyn Fn(&str) -> Option<String>,
    assignment: &BTreeMap<String, String>,
) -> Result<Formula, EvalError> {
    let mut err = None;
    let out = f.map_terms(&mut |t| match t {
        Term::Const(c) => match interp(c) {
            Some(e) => Term::Const(e),
            None => {
                err.get_or_insert(EvalError::Uninterpreted(c.clone()));
                t.clone()
            }
        },
        Term::Free(a) => match assignment.get(a) {
            Some(e) => Term::Const(e.clone()),
            None => {
                err.get_or_insert(EvalError::Unassigned(a.clone()));
                t.clone()
            }
        },
        Term::Bound(_) => t.clone(),
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Elements named by a ground formula.
pub(crate) fn elements(f: &Formula) -> BTreeSet<String> {
    f.constants()
}

/// Every assignment of `domain` elements to `vars`, in lexicographic order.
pub(crate) fn assignments(
    vars: &BTreeSet<String>,
    domain: &BTreeSet<String>,
) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                domain.iter().map(move |e| {
                    let mut b = a.clone();
                    b.insert(v.clone(), e.clone());
                    b
                })
            })
            .collect();
    }
    out
}

/// Valuation keys needed to evaluate the ground formula `f` over `domain`:
/// ground atoms and implications, plus disjunctions when `wd`.
pub fn valuation_keys(
    f: &Formula,
    domain: &BTreeSet<String>,
    wd: bool,
    out: &mut BTreeSet<Formula>,
) {
    match f {
        Formula::Top => {}
        Formula::Atom { .. } => {
            out.insert(f.clone());
        }
        Formula::And(l, r) => {
            valuation_keys(l, domain, wd, out);
            valuation_keys(r, domain, wd, out);
        }
        Formula::Or(l, r) => {
            if wd {
                out.insert(f.clone());
            }
            valuation_keys(l, domain, wd, out);
            valuation_keys(r, domain, wd, out);
        }
        Formula::Impl(l, r) => {
            out.insert(f.clone());
            valuation_keys(l, domain, wd, out);
            valuation_keys(r, domain, wd, out);
        }
        Formula::Forall(..) | Formula::Exists(..) => {
            for e in domain {
                let inst = f.instantiate(&Term::Const(e.clone())).expect("quantifier");
                valuation_keys(&inst, domain, wd, out);
            }
        }
    }
}

/// Keys stratified by complexity, so conditions can be checked bottom-up.
pub(crate) fn stratified<'a>(keys: impl Iterator<Item = &'a Formula>) -> Vec<&'a Formula> {
    let mut v: Vec<&Formula> = keys.collect();
    v.sort_by_key(|k| (k.complexity(), *k));
    v
}
