//! Formulas and sequents of the first-order primal language.
//!
//! The language has no function symbols. Terms are constants or free
//! variables; bound variables only occur below the quantifier that
//! introduces them. The three name classes never overlap, so substitution
//! of a term for a bound variable can not capture anything.

mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parser::{parse_formula, parse_formula_list, parse_sequent, ParseError};
pub(crate) use print::term_text;
pub use print::TermStyle;

/// Prefix reserved for machine-generated free variables.
pub const FRESH_PREFIX: &str = "_v";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Free(String),
    /// Occurrence of a bound variable inside a quantifier body.
    Bound(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn free(name: impl Into<String>) -> Self {
        Term::Free(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Const(n) | Term::Free(n) | Term::Bound(n) => n,
        }
    }

    pub fn is_bound(&self) -> bool {
        matches!(self, Term::Bound(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Atom { pred: String, args: Vec<Term> },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Impl(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("substituted term must be a constant or a free variable, got bound `{0}`")]
    BoundTerm(String),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom {
            pred: pred.into(),
            args,
        }
    }

    /// Nullary atom.
    pub fn prop(pred: impl Into<String>) -> Self {
        Formula::atom(pred, Vec::new())
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn imp(l: Formula, r: Formula) -> Self {
        Formula::Impl(Box::new(l), Box::new(r))
    }

    pub fn forall(x: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(x.into(), Box::new(body))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom { .. })
    }

    pub fn is_quantified(&self) -> bool {
        matches!(self, Formula::Forall(..) | Formula::Exists(..))
    }

    /// Replaces the free-for-substitution occurrences of the bound variable
    /// `bound` by `t`. Occurrences under an inner quantifier with the same
    /// name are left alone.
    pub fn substitute(&self, bound: &str, t: &Term) -> Result<Formula, SubstError> {
        if let Term::Bound(n) = t {
            return Err(SubstError::BoundTerm(n.clone()));
        }
        Ok(self.subst_bound(bound, t))
    }

    pub(crate) fn subst_bound(&self, bound: &str, t: &Term) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args
                    .iter()
                    .map(|a| match a {
                        Term::Bound(n) if n == bound => t.clone(),
                        other => other.clone(),
                    })
                    .collect(),
            },
            Formula::And(l, r) => Formula::and(l.subst_bound(bound, t), r.subst_bound(bound, t)),
            Formula::Or(l, r) => Formula::or(l.subst_bound(bound, t), r.subst_bound(bound, t)),
            Formula::Impl(l, r) => Formula::imp(l.subst_bound(bound, t), r.subst_bound(bound, t)),
            Formula::Forall(x, _) | Formula::Exists(x, _) if x == bound => self.clone(),
            Formula::Forall(x, b) => Formula::forall(x.clone(), b.subst_bound(bound, t)),
            Formula::Exists(x, b) => Formula::exists(x.clone(), b.subst_bound(bound, t)),
        }
    }

    /// Instance of a quantified formula's body; `None` for other shapes.
    pub fn instantiate(&self, t: &Term) -> Option<Formula> {
        match self {
            Formula::Forall(x, b) | Formula::Exists(x, b) => Some(b.subst_bound(x, t)),
            _ => None,
        }
    }

    /// Rewrites every term with `f`. Bound occurrences are passed through too.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args.iter().map(|a| f(a)).collect(),
            },
            Formula::And(l, r) => Formula::and(l.map_terms(f), r.map_terms(f)),
            Formula::Or(l, r) => Formula::or(l.map_terms(f), r.map_terms(f)),
            Formula::Impl(l, r) => Formula::imp(l.map_terms(f), r.map_terms(f)),
            Formula::Forall(x, b) => Formula::forall(x.clone(), b.map_terms(f)),
            Formula::Exists(x, b) => Formula::exists(x.clone(), b.map_terms(f)),
        }
    }

    /// Replaces the free variable `name` everywhere by `t`.
    pub fn replace_free(&self, name: &str, t: &Term) -> Formula {
        self.map_terms(&mut |a| match a {
            Term::Free(n) if n == name => t.clone(),
            other => other.clone(),
        })
    }

    pub fn for_each_term(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Formula::Top => {}
            Formula::Atom { args, .. } => args.iter().for_each(|a| f(a)),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
                l.for_each_term(f);
                r.for_each_term(f);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.for_each_term(f),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each_term(&mut |t| {
            if let Term::Free(n) = t {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each_term(&mut |t| {
            if let Term::Const(n) = t {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Constants and free variables, each at most once, in canonical order.
    pub fn terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.for_each_term(&mut |t| {
            if !t.is_bound() {
                out.insert(t.clone());
            }
        });
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Bound variables that occur outside any binder of their name.
    pub fn loose_bound_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, scope: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Top => {}
                Formula::Atom { args, .. } => {
                    for a in args {
                        if let Term::Bound(n) = a {
                            if !scope.contains(n) {
                                out.insert(n.clone());
                            }
                        }
                    }
                }
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
                    go(l, scope, out);
                    go(r, scope, out);
                }
                Formula::Forall(x, b) | Formula::Exists(x, b) => {
                    scope.push(x.clone());
                    go(b, scope, out);
                    scope.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Top | Formula::Atom { .. } => false,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
                l.has_quantifier() || r.has_quantifier()
            }
            Formula::Forall(..) | Formula::Exists(..) => true,
        }
    }

    /// Harrop class: `T | A | H & H | B -> H | forall x. H`.
    pub fn is_harrop(&self) -> bool {
        match self {
            Formula::Top | Formula::Atom { .. } => true,
            Formula::And(l, r) => l.is_harrop() && r.is_harrop(),
            Formula::Impl(_, r) => r.is_harrop(),
            Formula::Forall(_, b) => b.is_harrop(),
            Formula::Or(..) | Formula::Exists(..) => false,
        }
    }

    /// Implication-nesting measure used to stratify valuations.
    pub fn complexity(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom { .. } => 0,
            Formula::And(l, r) | Formula::Or(l, r) => l.complexity().max(r.complexity()),
            Formula::Impl(_, r) => r.complexity() + 1,
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.complexity(),
        }
    }

    /// Height of the parse tree; atoms and `T` have height 0.
    pub fn height(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom { .. } => 0,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
                1 + l.height().max(r.height())
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.height(),
        }
    }

    /// Predicate symbols with their arities.
    pub fn predicates(&self, out: &mut BTreeMap<String, usize>) {
        match self {
            Formula::Top => {}
            Formula::Atom { pred, args } => {
                out.entry(pred.clone()).or_insert(args.len());
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Impl(l, r) => {
                l.predicates(out);
                r.predicates(out);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.predicates(out),
        }
    }
}

/// `antecedent => succedent`, both sides finite sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Sequent {
    pub antecedent: BTreeSet<Formula>,
    pub succedent: BTreeSet<Formula>,
}

impl Sequent {
    pub fn new(
        antecedent: impl IntoIterator<Item = Formula>,
        succedent: impl IntoIterator<Item = Formula>,
    ) -> Self {
        Sequent {
            antecedent: antecedent.into_iter().collect(),
            succedent: succedent.into_iter().collect(),
        }
    }

    /// Sequent with a one-formula succedent.
    pub fn single(antecedent: impl IntoIterator<Item = Formula>, goal: Formula) -> Self {
        Sequent::new(antecedent, [goal])
    }

    /// The succedent formula when it is a singleton.
    pub fn sole_succedent(&self) -> Option<&Formula> {
        if self.succedent.len() == 1 {
            self.succedent.iter().next()
        } else {
            None
        }
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.antecedent.iter().chain(self.succedent.iter())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.formulas().flat_map(|f| f.free_vars()).collect()
    }

    pub fn terms(&self) -> BTreeSet<Term> {
        self.formulas().flat_map(|f| f.terms()).collect()
    }

    pub fn has_quantifier(&self) -> bool {
        self.formulas().any(Formula::has_quantifier)
    }

    pub fn map_formulas(&self, mut f: impl FnMut(&Formula) -> Formula) -> Sequent {
        Sequent {
            antecedent: self.antecedent.iter().map(&mut f).collect(),
            succedent: self.succedent.iter().map(&mut f).collect(),
        }
    }

    pub fn replace_free(&self, name: &str, t: &Term) -> Sequent {
        self.map_formulas(|f| f.replace_free(name, t))
    }

    /// Both sides are subsets of the corresponding sides of `other`.
    pub fn is_subsequent_of(&self, other: &Sequent) -> bool {
        self.antecedent.is_subset(&other.antecedent) && self.succedent.is_subset(&other.succedent)
    }
}

/// The ten proof systems: natural deduction (QP, QPW) and the Gentzen
/// calculi in single- and multi-conclusion form, first-order and
/// propositional, with or without the disjunction elimination rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CalculusId {
    QP,
    QPW,
    QGP,
    QGPW,
    QGPM,
    QGPMW,
    GP,
    GPM,
    GPW,
    GPMW,
}

impl CalculusId {
    pub const ALL: [CalculusId; 10] = [
        CalculusId::QP,
        CalculusId::QPW,
        CalculusId::QGP,
        CalculusId::QGPW,
        CalculusId::QGPM,
        CalculusId::QGPMW,
        CalculusId::GP,
        CalculusId::GPM,
        CalculusId::GPW,
        CalculusId::GPMW,
    ];

    pub fn is_natural_deduction(self) -> bool {
        matches!(self, CalculusId::QP | CalculusId::QPW)
    }

    /// Every judgement carries exactly one succedent formula.
    pub fn single_conclusion(self) -> bool {
        !self.multi_conclusion()
    }

    pub fn multi_conclusion(self) -> bool {
        matches!(
            self,
            CalculusId::QGPM | CalculusId::QGPMW | CalculusId::GPM | CalculusId::GPMW
        )
    }

    pub fn first_order(self) -> bool {
        matches!(
            self,
            CalculusId::QP
                | CalculusId::QPW
                | CalculusId::QGP
                | CalculusId::QGPW
                | CalculusId::QGPM
                | CalculusId::QGPMW
        )
    }

    /// Disjunction can be introduced but not eliminated.
    pub fn weak_disjunction(self) -> bool {
        matches!(
            self,
            CalculusId::QPW
                | CalculusId::QGPW
                | CalculusId::QGPMW
                | CalculusId::GPW
                | CalculusId::GPMW
        )
    }

    /// Gentzen calculus with the same rules and conclusion format, extended
    /// to the first-order language.
    pub fn first_order_version(self) -> CalculusId {
        match self {
            CalculusId::GP => CalculusId::QGP,
            CalculusId::GPW => CalculusId::QGPW,
            CalculusId::GPM => CalculusId::QGPM,
            CalculusId::GPMW => CalculusId::QGPMW,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CalculusId::QP => "qp",
            CalculusId::QPW => "qpw",
            CalculusId::QGP => "qgp",
            CalculusId::QGPW => "qgpw",
            CalculusId::QGPM => "qgpm",
            CalculusId::QGPMW => "qgpmw",
            CalculusId::GP => "gp",
            CalculusId::GPM => "gpm",
            CalculusId::GPW => "gpw",
            CalculusId::GPMW => "gpmw",
        }
    }
}

impl fmt::Display for CalculusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CalculusId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CalculusId::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown calculus `{s}`"))
    }
}

/// Free variable names `_v0, _v1, ...` that do not clash with `taken`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreshNames {
    prefix: String,
    next: usize,
    taken: BTreeSet<String>,
}

impl FreshNames {
    pub fn new(prefix: &str, taken: BTreeSet<String>) -> Self {
        FreshNames {
            prefix: prefix.to_owned(),
            next: 0,
            taken,
        }
    }

    pub fn avoiding(taken: BTreeSet<String>) -> Self {
        FreshNames::new(FRESH_PREFIX, taken)
    }

    pub fn next_name(&mut self) -> String {
        loop {
            let candidate = format!("{}{}", self.prefix, self.next);
            self.next += 1;
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_owned());
    }
}
