//! Cut-free proof search.
//!
//! Multi-conclusion calculi are decided by the reduction tree, whose
//! saturated branches yield quasi-boolean countermodels. Single-conclusion
//! calculi use iterative-deepening backward search with loop checking;
//! natural deduction proofs are obtained by translating QGP proofs.

mod search;
mod tree;

use thiserror::Error;

use crate::calculus::Derivation;
use crate::semantics::QuasiBooleanModel;
use crate::syntax::{CalculusId, Sequent};
use crate::transform::gentzen_to_nd;

pub use search::search_single;
pub use tree::{
    build_reduction_tree, extract_countermodel, reduction_step, BranchState, BranchTrace,
    ExtractError, Side, TraceEntry,
};

/// Resource limits for one call of [`prove`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Rule expansions (reduction steps or search nodes) over the whole run.
    pub max_steps: usize,
    /// Nodes kept in the reduction tree.
    pub max_branch_nodes: usize,
    /// Fresh variables introduced along one branch.
    pub max_fresh_vars: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 10_000,
            max_branch_nodes: 100_000,
            max_fresh_vars: 8,
        }
    }
}

impl Budget {
    pub fn with_steps(max_steps: usize) -> Self {
        Budget {
            max_steps,
            ..Budget::default()
        }
    }

    fn validate(&self) -> Result<(), ProverError> {
        if self.max_steps == 0 || self.max_branch_nodes == 0 || self.max_fresh_vars == 0 {
            Err(ProverError::ZeroBudget)
        } else {
            Ok(())
        }
    }
}

/// Work done before the search stopped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub steps: usize,
    pub nodes: usize,
    pub fresh_vars: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved(Derivation),
    /// Not derivable. Multi-conclusion refutations carry a checked
    /// countermodel and the saturated branch it was read from; refutations
    /// by exhausted search carry neither.
    Refuted {
        model: Option<QuasiBooleanModel>,
        branch: Option<BranchTrace>,
    },
    Unknown {
        spent: Counters,
        candidate: Option<QuasiBooleanModel>,
    },
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proved(_) => "proved",
            Verdict::Refuted { .. } => "refuted",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            Verdict::Proved(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("every budget limit must be positive")]
    ZeroBudget,
    #[error("{0} is propositional but the sequent has quantifiers")]
    QuantifierInPropositional(CalculusId),
    #[error("{0} needs exactly one succedent formula")]
    SuccedentArity(CalculusId),
}

/// Searches for a cut-free derivation of `s` in `calculus`.
pub fn prove(s: &Sequent, calculus: CalculusId, budget: Budget) -> Result<Verdict, ProverError> {
    budget.validate()?;
    if !calculus.first_order() && s.has_quantifier() {
        return Err(ProverError::QuantifierInPropositional(calculus));
    }
    if calculus.multi_conclusion() {
        return build_reduction_tree_in(s, calculus.weak_disjunction(), budget);
    }
    if s.succedent.len() != 1 {
        return Err(ProverError::SuccedentArity(calculus));
    }
    let mut verdict = search_single(s, calculus.weak_disjunction(), budget);
    if let Verdict::Refuted { model: None, .. } = verdict {
        // Single-conclusion derivability is contained in the multi-conclusion
        // one, so a reduction-tree countermodel also refutes here.
        if let found @ Verdict::Refuted { model: Some(_), .. } =
            tree::run(s, calculus.weak_disjunction(), budget)
        {
            verdict = found;
        }
    }
    if calculus.is_natural_deduction() {
        if let Verdict::Proved(d) = verdict {
            let nd = gentzen_to_nd(&d).expect("search output is a cut-free QGP derivation");
            return Ok(Verdict::Proved(nd));
        }
    }
    Ok(verdict)
}

fn build_reduction_tree_in(s: &Sequent, wd: bool, budget: Budget) -> Result<Verdict, ProverError> {
    Ok(tree::run(s, wd, budget))
}
