use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Derivation, RuleId};
use crate::syntax::{parse_formula, parse_sequent, Formula, ParseError, Term, TermStyle};

/// Deepest proof tree accepted by [`derivation_from_json`].
pub const MAX_PROOF_DEPTH: usize = 4000;

#[derive(Debug, Error)]
pub enum SerialError {
    #[error("malformed proof document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("proof document nests deeper than {MAX_PROOF_DEPTH} levels")]
    TooDeep,
    #[error("bad {field} `{text}`: {source}")]
    Text {
        field: &'static str,
        text: String,
        source: ParseError,
    },
    #[error("bad witness `{0}`: expected a constant or free variable")]
    Witness(String),
}

/// Wire form of a [`Derivation`]. Field order is fixed, so output is
/// byte-stable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivationDoc {
    pub rule: RuleId,
    pub conclusion: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvariable: Option<String>,
    #[serde(default)]
    pub premises: Vec<DerivationDoc>,
}

impl From<&Derivation> for DerivationDoc {
    fn from(d: &Derivation) -> Self {
        DerivationDoc {
            rule: d.rule,
            conclusion: d.conclusion.to_string(),
            principal: d
                .principal
                .as_ref()
                .map(|f| f.to_text(TermStyle::Canonical)),
            witness: d.witness.as_ref().map(Term::to_string),
            eigenvariable: d.eigenvariable.clone(),
            premises: d.premises.iter().map(DerivationDoc::from).collect(),
        }
    }
}

impl TryFrom<&DerivationDoc> for Derivation {
    type Error = SerialError;

    fn try_from(doc: &DerivationDoc) -> Result<Self, SerialError> {
        fn text_err<'a>(
            field: &'static str,
            text: &'a str,
        ) -> impl FnOnce(ParseError) -> SerialError + 'a {
            move |source| SerialError::Text {
                field,
                text: text.to_owned(),
                source,
            }
        }
        let conclusion =
            parse_sequent(&doc.conclusion).map_err(text_err("conclusion", &doc.conclusion))?;
        let principal = match &doc.principal {
            Some(p) => Some(parse_formula(p).map_err(text_err("principal", p))?),
            None => None,
        };
        let witness = match &doc.witness {
            Some(w) => Some(parse_term(w)?),
            None => None,
        };
        let premises = doc
            .premises
            .iter()
            .map(Derivation::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Derivation {
            conclusion,
            rule: doc.rule,
            principal,
            witness,
            eigenvariable: doc.eigenvariable.clone(),
            premises,
        })
    }
}

fn parse_term(text: &str) -> Result<Term, SerialError> {
    let wrapped = format!("W({text})");
    match parse_formula(&wrapped) {
        Ok(Formula::Atom { args, .. }) if args.len() == 1 && !args[0].is_bound() => {
            Ok(args[0].clone())
        }
        _ => Err(SerialError::Witness(text.to_owned())),
    }
}

pub fn derivation_to_json(d: &Derivation) -> String {
    serde_json::to_string_pretty(&DerivationDoc::from(d))
        .expect("derivation documents always serialize")
}

pub fn derivation_from_json(text: &str) -> Result<Derivation, SerialError> {
    if nesting(text) > 2 * MAX_PROOF_DEPTH + 2 {
        return Err(SerialError::TooDeep);
    }
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let doc = DerivationDoc::deserialize(&mut de)?;
    de.end()?;
    Derivation::try_from(&doc)
}

// Maximum bracket nesting outside string literals.
fn nesting(text: &str) -> usize {
    let (mut depth, mut max, mut in_str, mut escaped) = (0usize, 0usize, false, false);
    for b in text.bytes() {
        if in_str {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' | b'[' => {
                depth += 1;
                max = max.max(depth);
            }
            b'}' | b']' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sequent;

    #[test]
    fn round_trip() {
        let top = parse_sequent("=> exists x. P(x)").unwrap();
        let d = Derivation::new(
            top,
            RuleId::ExistsR,
            vec![Derivation::new(
                parse_sequent("P('k') => P('k')").unwrap(),
                RuleId::Axiom,
                vec![],
            )],
        )
        .with_witness(Term::constant("k"));
        // The premise is deliberately not a valid child; serialization does not check.
        let json = derivation_to_json(&d);
        assert!(json.find("\"rule\"").unwrap() < json.find("\"conclusion\"").unwrap());
        assert_eq!(derivation_from_json(&json).unwrap(), d);
    }

    #[test]
    fn rejects_deep_and_unknown() {
        let deep = "[".repeat(20_000);
        assert!(matches!(
            derivation_from_json(&deep),
            Err(SerialError::TooDeep)
        ));
        assert!(
            derivation_from_json(r#"{"rule":"Axiom","conclusion":"p => p","extra":1}"#).is_err()
        );
        assert!(
            derivation_from_json(r#"{"rule":"Axiom","conclusion":"p => p","witness":"x y"}"#)
                .is_err()
        );
    }
}
