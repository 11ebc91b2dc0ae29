use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{by_height, keys_of};
use crate::prover::{prove, Budget, ProverError, Verdict};
use crate::semantics::{EvalError, QuasiBooleanModel};
use crate::syntax::{CalculusId, Formula, Sequent, Term};

/// Name of the element added to the constants of the input. It is a free
/// variable name, so oracle queries treat it as an arbitrary object.
pub const NEW_ELEMENT: &str = "_new";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("{0} is not a Harrop formula")]
    NonHarrop(Formula),
    #[error("the disjunction property is stated for QGP and QGPM, not {0}")]
    Calculus(CalculusId),
    #[error(transparent)]
    Prover(#[from] ProverError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The model built from what `gamma` derives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpModel {
    pub gamma: BTreeSet<Formula>,
    pub calculus: CalculusId,
    pub model: QuasiBooleanModel,
    /// Keys whose oracle call ran out of budget. They are valued 0 but any
    /// formula depending on them is unreliable.
    pub poisoned: BTreeSet<Formula>,
    /// Oracle answers by ground key: `Some(true)` proved, `Some(false)`
    /// refuted, `None` unknown.
    pub oracle: BTreeMap<Formula, Option<bool>>,
    /// Domain elements that stand for free variables (including the new one).
    variables: BTreeSet<String>,
}

impl DpModel {
    pub fn is_partial(&self) -> bool {
        !self.poisoned.is_empty()
    }

    /// `M |= f`, reading free variables of `f` as the elements of that name.
    pub fn eval(&self, f: &Formula) -> Result<bool, EvalError> {
        let assignment: BTreeMap<String, String> =
            f.free_vars().into_iter().map(|v| (v.clone(), v)).collect();
        self.model.eval_with(f, &assignment)
    }

    /// Whether `f` depends on a poisoned key.
    pub fn depends_on_poison(&self, f: &Formula) -> bool {
        let mut keys = BTreeSet::new();
        let ground = self.ground(f);
        if keys_of(
            &ground,
            &self.model.domain,
            &BTreeMap::new(),
            false,
            &mut keys,
        )
        .is_err()
        {
            return true;
        }
        keys.iter().any(|k| self.poisoned.contains(k))
    }

    fn ground(&self, f: &Formula) -> Formula {
        f.map_terms(&mut |t| match t {
            Term::Free(v) => Term::Const(v.clone()),
            other => other.clone(),
        })
    }

    /// The query formula for a ground key: elements naming variables become
    /// free variables again.
    fn unground(&self, key: &Formula) -> Formula {
        key.map_terms(&mut |t| match t {
            Term::Const(e) if self.variables.contains(e) => Term::Free(e.clone()),
            other => other.clone(),
        })
    }
}

fn check_input(gamma: &BTreeSet<Formula>, calculus: CalculusId) -> Result<(), DpError> {
    if !matches!(calculus, CalculusId::QGP | CalculusId::QGPM) {
        return Err(DpError::Calculus(calculus));
    }
    if let Some(f) = gamma.iter().find(|f| !f.is_harrop()) {
        return Err(DpError::NonHarrop(f.clone()));
    }
    Ok(())
}

fn oracle(
    gamma: &BTreeSet<Formula>,
    f: &Formula,
    calculus: CalculusId,
    budget: Budget,
) -> Result<Verdict, DpError> {
    Ok(prove(
        &Sequent::single(gamma.iter().cloned(), f.clone()),
        calculus,
        budget,
    )?)
}

/// The model whose domain is the constants (and free variables) of the
/// input plus [`NEW_ELEMENT`]; an atom is true iff `gamma` derives it, and
/// an implication is true iff `gamma` derives it and it is not falsified by
/// its own components. Keys are computed for `gamma`, `alpha`, `beta` and
/// every formula of `pool`, subformulas first.
pub fn build_dp_model(
    gamma: &BTreeSet<Formula>,
    alpha: &Formula,
    beta: &Formula,
    pool: &[Formula],
    calculus: CalculusId,
    budget: Budget,
) -> Result<DpModel, DpError> {
    check_input(gamma, calculus)?;
    let all: Vec<&Formula> = gamma
        .iter()
        .chain([alpha, beta])
        .chain(pool.iter())
        .collect();
    let mut variables: BTreeSet<String> = all.iter().flat_map(|f| f.free_vars()).collect();
    variables.insert(NEW_ELEMENT.to_owned());
    let mut domain: BTreeSet<String> = all.iter().flat_map(|f| f.constants()).collect();
    domain.extend(variables.iter().cloned());
    let mut dp = DpModel {
        gamma: gamma.clone(),
        calculus,
        model: QuasiBooleanModel::new(domain.clone()),
        poisoned: BTreeSet::new(),
        oracle: BTreeMap::new(),
        variables,
    };
    let mut keys = BTreeSet::new();
    for f in &all {
        let g = dp.ground(f);
        keys_of(&g, &domain, &BTreeMap::new(), false, &mut keys)?;
    }
    for key in by_height(keys) {
        let admissible = match &key {
            Formula::Impl(a, b) => !dp.model.eval_ground(a)? || dp.model.eval_ground(b)?,
            _ => true,
        };
        let value = if admissible {
            let query = dp.unground(&key);
            let answer = match oracle(gamma, &query, calculus, budget)? {
                Verdict::Proved(_) => Some(true),
                Verdict::Refuted { .. } => Some(false),
                Verdict::Unknown { .. } => None,
            };
            dp.oracle.insert(key.clone(), answer);
            if answer.is_none() {
                dp.poisoned.insert(key.clone());
            }
            answer.unwrap_or(false)
        } else {
            false
        };
        dp.model.valuation.insert(key, value);
    }
    Ok(dp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Choice {
    Left,
    Right,
    Neither,
    NonHarrop,
}

impl Choice {
    pub fn label(self) -> &'static str {
        match self {
            Choice::Left => "left",
            Choice::Right => "right",
            Choice::Neither => "neither",
            Choice::NonHarrop => "non-harrop",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpReport {
    pub gamma: BTreeSet<Formula>,
    pub alpha: Formula,
    pub beta: Formula,
    pub chosen: Choice,
    /// `None` when `gamma` is not Harrop.
    pub model: Option<DpModel>,
    pub disjunction: Verdict,
    pub left: Verdict,
    pub right: Verdict,
}

impl DpReport {
    /// Some query ran out of budget.
    pub fn budget_exhausted(&self) -> bool {
        [&self.disjunction, &self.left, &self.right]
            .iter()
            .any(|v| v.is_unknown())
            || self.model.as_ref().is_some_and(DpModel::is_partial)
    }
}

/// Decides `gamma => alpha | beta`, `gamma => alpha` and `gamma => beta`,
/// and reports which disjunct a proof of the disjunction yields.
pub fn dp_split(
    gamma: &BTreeSet<Formula>,
    alpha: &Formula,
    beta: &Formula,
    calculus: CalculusId,
    budget: Budget,
) -> Result<DpReport, DpError> {
    let disjunction = oracle(
        gamma,
        &Formula::or(alpha.clone(), beta.clone()),
        calculus,
        budget,
    )?;
    let left = oracle(gamma, alpha, calculus, budget)?;
    let right = oracle(gamma, beta, calculus, budget)?;
    let model = match build_dp_model(gamma, alpha, beta, &[], calculus, budget) {
        Ok(m) => Some(m),
        Err(DpError::NonHarrop(_)) => None,
        Err(e) => return Err(e),
    };
    let chosen = if model.is_none() {
        Choice::NonHarrop
    } else if !disjunction.is_proved() {
        Choice::Neither
    } else if left.is_proved() {
        Choice::Left
    } else if right.is_proved() {
        Choice::Right
    } else {
        Choice::Neither
    };
    Ok(DpReport {
        gamma: gamma.clone(),
        alpha: alpha.clone(),
        beta: beta.clone(),
        chosen,
        model,
        disjunction,
        left,
        right,
    })
}

/// Outcome of comparing the model with the prover over a pool of formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Agreement {
    pub checked: usize,
    pub skipped: usize,
    /// Harrop formulas where truth in the model and derivability differ.
    pub harrop_mismatches: Vec<Formula>,
    /// Formulas true in the model but refuted from `gamma`.
    pub truth_not_derivable: Vec<Formula>,
}

/// For every formula of `pool`: if the model makes it true then `gamma`
/// derives it, and for Harrop formulas the converse too. Formulas whose
/// oracle call is indecisive or that depend on poisoned keys are skipped.
pub fn check_dp_agreement(
    dp: &DpModel,
    pool: &[Formula],
    budget: Budget,
) -> Result<Agreement, DpError> {
    let mut out = Agreement::default();
    for f in pool {
        if dp.depends_on_poison(f) {
            out.skipped += 1;
            continue;
        }
        let derivable = match oracle(&dp.gamma, f, dp.calculus, budget)? {
            Verdict::Proved(_) => true,
            Verdict::Refuted { .. } => false,
            Verdict::Unknown { .. } => {
                out.skipped += 1;
                continue;
            }
        };
        let truth = dp.eval(f)?;
        out.checked += 1;
        if truth && !derivable {
            out.truth_not_derivable.push(f.clone());
        }
        if f.is_harrop() && truth != derivable {
            out.harrop_mismatches.push(f.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<Formula> {
        items.iter().map(|s| f(s)).collect()
    }

    #[test]
    fn atoms_follow_derivability() {
        let dp = build_dp_model(
            &set(&["p"]),
            &f("p"),
            &f("q"),
            &[],
            CalculusId::QGPM,
            Budget::default(),
        )
        .unwrap();
        assert_eq!(dp.model.domain, BTreeSet::from([NEW_ELEMENT.to_owned()]));
        assert_eq!(dp.model.valuation.get(&f("p")), Some(&true));
        assert_eq!(dp.model.valuation.get(&f("q")), Some(&false));
    }

    #[test]
    fn constants_join_the_domain() {
        let dp = build_dp_model(
            &set(&["P(c1)"]),
            &f("exists x. P(x)"),
            &f("q"),
            &[],
            CalculusId::QGP,
            Budget::default(),
        )
        .unwrap();
        assert_eq!(
            dp.model.domain,
            BTreeSet::from(["c1".to_owned(), NEW_ELEMENT.to_owned()])
        );
        assert_eq!(dp.model.valuation.get(&f("P(c1)")), Some(&true));
        let new = Formula::atom("P", vec![Term::constant(NEW_ELEMENT)]);
        assert_eq!(dp.model.valuation.get(&new), Some(&false));
    }

    #[test]
    fn split_examples() {
        let b = Budget::default();
        let r = dp_split(&set(&["p -> q", "p"]), &f("q"), &f("r"), CalculusId::QGP, b).unwrap();
        assert_eq!(r.chosen, Choice::Left);
        let r = dp_split(&set(&["q"]), &f("p"), &f("q"), CalculusId::QGPM, b).unwrap();
        assert_eq!(r.chosen, Choice::Right);
        let r = dp_split(&set(&["p | q"]), &f("p"), &f("q"), CalculusId::QGPM, b).unwrap();
        assert_eq!(r.chosen, Choice::NonHarrop);
    }
}
