//! Derivations, rule checking and cut elimination.

mod check;
mod cut;
mod serial;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{Formula, FreshNames, Sequent, Term};

pub use check::{
    check_derivation, check_derivation_with, check_inference, CheckFailure, CheckOptions, Violation,
};
pub use cut::{eliminate_cut, grade, rank, CutError};
pub use serial::{derivation_from_json, derivation_to_json, DerivationDoc, SerialError};

/// Inference rules of all calculi. Sequent rules are used by the Gentzen
/// calculi, the `...E`/`...I` rules and `Trans` by natural deduction.
/// `CdAxiom` marks a constant-domain leaf in QGP+CD derivations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    Axiom,
    TopAxiom,
    AndL,
    AndR,
    OrL,
    OrR,
    ImplL,
    ImplRp,
    ForallL,
    ForallR,
    ExistsL,
    ExistsR,
    Weakening,
    Cut,
    Trans,
    AndE1,
    AndE2,
    AndI,
    OrI1,
    OrI2,
    OrE,
    ImplE,
    ImplIW,
    ForallI,
    ForallE,
    ExistsI,
    ExistsE,
    CdAxiom,
}

impl RuleId {
    pub fn arity(self) -> usize {
        use RuleId::*;
        match self {
            Axiom | TopAxiom | CdAxiom => 0,
            AndL | OrR | ImplRp | ForallL | ForallR | ExistsL | ExistsR | Weakening => 1,
            AndE1 | AndE2 | OrI1 | OrI2 | ImplIW | ForallI | ForallE | ExistsI => 1,
            AndR | OrL | ImplL | Cut | Trans | AndI | ImplE | ExistsE => 2,
            OrE => 3,
        }
    }

    pub fn is_natural_deduction(self) -> bool {
        use RuleId::*;
        matches!(
            self,
            Trans
                | AndE1
                | AndE2
                | AndI
                | OrI1
                | OrI2
                | OrE
                | ImplE
                | ImplIW
                | ForallI
                | ForallE
                | ExistsI
                | ExistsE
        )
    }

    pub fn is_sequent_rule(self) -> bool {
        use RuleId::*;
        matches!(
            self,
            AndL | AndR
                | OrL
                | OrR
                | ImplL
                | ImplRp
                | ForallL
                | ForallR
                | ExistsL
                | ExistsR
                | Cut
                | CdAxiom
        )
    }

    pub fn is_quantifier_rule(self) -> bool {
        use RuleId::*;
        matches!(
            self,
            ForallL | ForallR | ExistsL | ExistsR | ForallI | ForallE | ExistsI | ExistsE | CdAxiom
        )
    }

    pub fn takes_witness(self) -> bool {
        use RuleId::*;
        matches!(self, ForallL | ExistsR | ForallE | ExistsI)
    }

    pub fn takes_eigenvariable(self) -> bool {
        use RuleId::*;
        matches!(self, ForallR | ExistsL | ForallI | ExistsE)
    }

    /// Left sequent rule: its principal formula sits in the antecedent.
    pub fn is_left_rule(self) -> bool {
        use RuleId::*;
        matches!(self, AndL | OrL | ImplL | ForallL | ExistsL)
    }

    pub fn is_right_rule(self) -> bool {
        use RuleId::*;
        matches!(self, AndR | OrR | ImplRp | ForallR | ExistsR)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| format!("unknown rule `{s}`"))
    }
}

/// A proof tree. Principal formulas, witnesses and eigenvariables are stored
/// explicitly so every node can be checked locally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub conclusion: Sequent,
    pub rule: RuleId,
    pub principal: Option<Formula>,
    pub witness: Option<Term>,
    pub eigenvariable: Option<String>,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn new(conclusion: Sequent, rule: RuleId, premises: Vec<Derivation>) -> Self {
        Derivation {
            conclusion,
            rule,
            principal: None,
            witness: None,
            eigenvariable: None,
            premises,
        }
    }

    pub fn with_principal(mut self, f: Formula) -> Self {
        self.principal = Some(f);
        self
    }

    pub fn with_witness(mut self, t: Term) -> Self {
        self.witness = Some(t);
        self
    }

    pub fn with_eigenvariable(mut self, a: impl Into<String>) -> Self {
        self.eigenvariable = Some(a.into());
        self
    }

    /// `f => f`.
    pub fn axiom(f: Formula) -> Self {
        Derivation::new(
            Sequent::new([f.clone()], [f.clone()]),
            RuleId::Axiom,
            vec![],
        )
        .with_principal(f)
    }

    /// `=> T`.
    pub fn top_axiom() -> Self {
        Derivation::new(Sequent::new([], [Formula::Top]), RuleId::TopAxiom, vec![])
    }

    /// Weakens `self` to `target`, or returns it unchanged when the
    /// conclusions already agree. Panics when `target` does not contain the
    /// current conclusion.
    pub fn weaken_to(self, target: &Sequent) -> Derivation {
        if &self.conclusion == target {
            return self;
        }
        assert!(
            self.conclusion.is_subsequent_of(target),
            "weakening {} to {} drops formulas",
            self.conclusion,
            target
        );
        Derivation::new(target.clone(), RuleId::Weakening, vec![self])
    }

    /// Number of rule applications on the longest branch; a leaf has height 1.
    pub fn height(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(Derivation::height)
            .max()
            .unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn count_rule(&self, rule: RuleId) -> usize {
        usize::from(self.rule == rule)
            + self
                .premises
                .iter()
                .map(|p| p.count_rule(rule))
                .sum::<usize>()
    }

    pub fn has_cut(&self) -> bool {
        self.count_rule(RuleId::Cut) + self.count_rule(RuleId::Trans) > 0
    }

    pub fn premise_sequents(&self) -> Vec<&Sequent> {
        self.premises.iter().map(|p| &p.conclusion).collect()
    }

    /// Every free-variable and constant name mentioned anywhere in the tree.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        for f in self.conclusion.formulas().chain(self.principal.iter()) {
            f.for_each_term(&mut |t| {
                if !t.is_bound() {
                    out.insert(t.name().to_owned());
                }
            });
        }
        if let Some(w) = &self.witness {
            out.insert(w.name().to_owned());
        }
        if let Some(a) = &self.eigenvariable {
            out.insert(a.clone());
        }
        for p in &self.premises {
            p.collect_names(out);
        }
    }

    /// Replaces the free variable `name` by `t` throughout the tree,
    /// including witnesses. An eigenvariable equal to `name` is renamed too
    /// when `t` is a free variable.
    pub fn replace_free(&self, name: &str, t: &Term) -> Derivation {
        Derivation {
            conclusion: self.conclusion.replace_free(name, t),
            rule: self.rule,
            principal: self.principal.as_ref().map(|f| f.replace_free(name, t)),
            witness: self.witness.as_ref().map(|w| match w {
                Term::Free(n) if n == name => t.clone(),
                other => other.clone(),
            }),
            eigenvariable: self.eigenvariable.as_ref().map(|a| match t {
                Term::Free(new) if a == name => new.clone(),
                _ => a.clone(),
            }),
            premises: self
                .premises
                .iter()
                .map(|p| p.replace_free(name, t))
                .collect(),
        }
    }

    /// Renames every eigenvariable in the tree to a fresh name, so that a
    /// later substitution for some free variable can not collide with one.
    pub fn freshen_eigenvariables(&self, fresh: &mut FreshNames) -> Derivation {
        let mut premises: Vec<Derivation> = self.premises.clone();
        let mut eigen = self.eigenvariable.clone();
        if let Some(a) = &self.eigenvariable {
            let b = fresh.next_name();
            let bt = Term::Free(b.clone());
            premises = premises.iter().map(|p| p.replace_free(a, &bt)).collect();
            eigen = Some(b);
        }
        Derivation {
            conclusion: self.conclusion.clone(),
            rule: self.rule,
            principal: self.principal.clone(),
            witness: self.witness.clone(),
            eigenvariable: eigen,
            premises: premises
                .iter()
                .map(|p| p.freshen_eigenvariables(fresh))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sequent;

    #[test]
    fn rule_names_parse() {
        assert_eq!("ImplRp".parse::<RuleId>().unwrap(), RuleId::ImplRp);
        assert!("Nope".parse::<RuleId>().is_err());
    }

    #[test]
    fn weaken_to_same_is_identity() {
        let d = Derivation::axiom(Formula::prop("p"));
        let c = d.conclusion.clone();
        assert_eq!(d.clone().weaken_to(&c), d);
        let bigger = parse_sequent("p, q => p").unwrap();
        let w = d.weaken_to(&bigger);
        assert_eq!(w.rule, RuleId::Weakening);
        assert_eq!(w.height(), 2);
    }

    #[test]
    fn freshen_renames_eigenvariable_above() {
        let s = parse_sequent("=> forall x. P(x)").unwrap();
        let prem = parse_sequent("=> P(a)").unwrap();
        let d = Derivation::new(
            s,
            RuleId::ForallR,
            vec![Derivation::new(prem, RuleId::Axiom, vec![])],
        )
        .with_eigenvariable("a");
        let mut fresh = FreshNames::avoiding(d.names());
        let e = d.freshen_eigenvariables(&mut fresh);
        assert_eq!(e.eigenvariable.as_deref(), Some("_v0"));
        assert_eq!(
            e.premises[0].conclusion,
            parse_sequent("=> P(_v0)").unwrap()
        );
    }
}
