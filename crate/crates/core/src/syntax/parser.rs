//! Recursive-descent parser for formulas and sequents.
//!
//! Grammar (ASCII, with Unicode alternatives in brackets):
//!
//! ```text
//! sequent  := list '=>' list                       [⇒]
//! list     := (formula (',' formula)*)?
//! formula  := quant | impl
//! quant    := ('forall' | 'exists') IDENT '.' formula  [∀ ∃]
//! impl     := or ('->' formula)?                    [→]
//! or       := and ('|' and)*                        [∨]
//! and      := unary ('&' unary)*                    [∧]
//! unary    := quant | primary
//! primary  := 'T' | '(' formula ')' | IDENT ('(' term (',' term)* ')')?   [⊤]
//! term     := IDENT | '\'' chars '\''
//! ```
//!
//! A term identifier bound by an enclosing quantifier is a bound variable;
//! otherwise quoted names and names starting with `c` are constants and the
//! rest are free variables.

use std::collections::{BTreeMap, BTreeSet};

use super::{Formula, Sequent, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("`{name}` is used both as a bound variable and as a free variable or constant")]
    Namespace { name: String },
    #[error(
        "predicate `{pred}` used with {found} arguments at byte {pos}, first use had {expected}"
    )]
    Arity {
        pred: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("empty input")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Arrow,
    Turnstile,
    Forall,
    Exists,
    Top,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Quoted(s) => format!("constant '{s}'"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::And => "`&`".into(),
        Tok::Or => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Turnstile => "`=>`".into(),
        Tok::Forall => "`forall`".into(),
        Tok::Exists => "`exists`".into(),
        Tok::Top => "`T`".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        let err = |msg: String| ParseError::Syntax { pos, msg };
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '(' | ')' | ',' | '.' | '&' | '|' | '∧' | '∨' | '→' | '⇒' | '∀' | '∃' | '⊤' =>
            {
                it.next();
                out.push((
                    pos,
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '.' => Tok::Dot,
                        '&' | '∧' => Tok::And,
                        '|' | '∨' => Tok::Or,
                        '→' => Tok::Arrow,
                        '⇒' => Tok::Turnstile,
                        '∀' => Tok::Forall,
                        '∃' => Tok::Exists,
                        _ => Tok::Top,
                    },
                ));
            }
            '-' | '=' => {
                it.next();
                match it.next() {
                    Some((_, '>')) => {
                        out.push((pos, if c == '-' { Tok::Arrow } else { Tok::Turnstile }))
                    }
                    _ => return Err(err(format!("expected `>` after `{c}`"))),
                }
            }
            '\'' => {
                it.next();
                let mut name = String::new();
                loop {
                    match it.next() {
                        Some((_, '\\')) => match it.next() {
                            Some((_, e)) => name.push(e),
                            None => return Err(err("unterminated quoted constant".into())),
                        },
                        Some((_, '\'')) => break,
                        Some((_, ch)) => name.push(ch),
                        None => return Err(err("unterminated quoted constant".into())),
                    }
                }
                if name.is_empty() {
                    return Err(err("empty quoted constant".into()));
                }
                out.push((pos, Tok::Quoted(name)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, ch)) = it.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        name.push(ch);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((
                    pos,
                    match name.as_str() {
                        "forall" => Tok::Forall,
                        "exists" => Tok::Exists,
                        "T" => Tok::Top,
                        _ => Tok::Ident(name),
                    },
                ));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
    scope: Vec<String>,
    binders: BTreeSet<String>,
    unbound: BTreeSet<String>,
    arity: BTreeMap<String, usize>,
    depth: usize,
}

const MAX_DEPTH: usize = 256;

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            idx: 0,
            end: src.len(),
            scope: Vec::new(),
            binders: BTreeSet::new(),
            unbound: BTreeSet::new(),
            arity: BTreeMap::new(),
            depth: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", describe(t))),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.depth >= MAX_DEPTH {
            return self.error("formula nested too deeply");
        }
        self.depth += 1;
        let f = self.formula_inner();
        self.depth -= 1;
        f
    }

    fn formula_inner(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Forall | Tok::Exists) => self.quantifier(),
            _ => {
                let lhs = self.disjunction()?;
                if self.peek() == Some(&Tok::Arrow) {
                    self.idx += 1;
                    let rhs = self.formula()?;
                    Ok(Formula::imp(lhs, rhs))
                } else {
                    Ok(lhs)
                }
            }
        }
    }

    fn quantifier(&mut self) -> Result<Formula, ParseError> {
        let universal = self.bump() == Some(Tok::Forall);
        let var = match self.bump() {
            Some(Tok::Ident(v)) => v,
            _ => {
                self.idx -= 1;
                return self.unexpected("a bound variable name");
            }
        };
        if var.starts_with('c') || var.starts_with('_') {
            self.idx -= 1;
            return self.error(format!(
                "bound variable `{var}` may not start with `c` or `_` (reserved for constants and generated names)"
            ));
        }
        self.expect(Tok::Dot, "`.` after the bound variable")?;
        self.binders.insert(var.clone());
        self.scope.push(var.clone());
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        Ok(if universal {
            Formula::forall(var, body)
        } else {
            Formula::exists(var, body)
        })
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.idx += 1;
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.idx += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Forall | Tok::Exists) => self.formula(),
            Some(Tok::Top) => {
                self.idx += 1;
                Ok(Formula::Top)
            }
            Some(Tok::LParen) => {
                self.idx += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => self.unexpected("a formula"),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        let Some(Tok::Ident(pred)) = self.bump() else {
            unreachable!("atom called on identifier")
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.idx += 1;
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.idx += 1,
                    Some(Tok::RParen) => {
                        self.idx += 1;
                        break;
                    }
                    _ => return self.unexpected("`,` or `)` in argument list"),
                }
            }
        }
        match self.arity.get(&pred) {
            Some(&expected) if expected != args.len() => {
                return Err(ParseError::Arity {
                    pred,
                    expected,
                    found: args.len(),
                    pos,
                })
            }
            Some(_) => {}
            None => {
                self.arity.insert(pred.clone(), args.len());
            }
        }
        Ok(Formula::Atom { pred, args })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.bump() {
            Some(Tok::Quoted(name)) => {
                self.unbound.insert(name.clone());
                Ok(Term::Const(name))
            }
            Some(Tok::Ident(name)) => {
                if self.scope.contains(&name) {
                    Ok(Term::Bound(name))
                } else {
                    self.unbound.insert(name.clone());
                    if name.starts_with('c') {
                        Ok(Term::Const(name))
                    } else {
                        Ok(Term::Free(name))
                    }
                }
            }
            _ => {
                self.idx -= 1;
                self.unexpected("a term")
            }
        }
    }

    fn formula_list(&mut self, stop: Option<&Tok>) -> Result<Vec<Formula>, ParseError> {
        let mut out = Vec::new();
        if self.peek().is_none() || self.peek() == stop {
            return Ok(out);
        }
        loop {
            out.push(self.formula()?);
            if self.peek() == Some(&Tok::Comma) {
                self.idx += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.idx < self.toks.len() {
            return self.unexpected("end of input");
        }
        if let Some(name) = self.binders.intersection(&self.unbound).next() {
            return Err(ParseError::Namespace { name: name.clone() });
        }
        Ok(())
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    if p.toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Comma-separated formulas; predicate arities are shared across the list.
pub fn parse_formula_list(text: &str) -> Result<Vec<Formula>, ParseError> {
    let mut p = Parser::new(text)?;
    let fs = p.formula_list(None)?;
    p.finish()?;
    Ok(fs)
}

pub fn parse_sequent(text: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text)?;
    if p.toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let ant = p.formula_list(Some(&Tok::Turnstile))?;
    p.expect(Tok::Turnstile, "`,` or `=>`")?;
    let suc = p.formula_list(None)?;
    p.finish()?;
    Ok(Sequent::new(ant, suc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx() -> Formula {
        Formula::atom("B", vec![Term::Bound("x".into())])
    }

    #[test]
    fn top_constant() {
        assert_eq!(parse_formula("T").unwrap(), Formula::Top);
    }

    #[test]
    fn quantified_disjunction() {
        assert_eq!(
            parse_formula("forall x. (A | B(x))").unwrap(),
            Formula::forall("x", Formula::or(Formula::prop("A"), bx()))
        );
    }

    #[test]
    fn implication_is_right_associative() {
        let (p, q, r) = (Formula::prop("p"), Formula::prop("q"), Formula::prop("r"));
        assert_eq!(
            parse_formula("p -> q -> r").unwrap(),
            Formula::imp(p, Formula::imp(q, r))
        );
    }

    #[test]
    fn precedence_and_over_or_over_arrow() {
        let f = parse_formula("a1 & b1 | c1 -> d1").unwrap();
        let [a, b, c, d] = ["a1", "b1", "c1", "d1"].map(Formula::prop);
        assert_eq!(f, Formula::imp(Formula::or(Formula::and(a, b), c), d));
    }

    #[test]
    fn quantifier_operand_extends_right() {
        let f = parse_formula("A | forall x. B(x)").unwrap();
        assert_eq!(
            f,
            Formula::or(Formula::prop("A"), Formula::forall("x", bx()))
        );
    }

    #[test]
    fn term_classes() {
        let f = parse_formula("P(c1, a, 'bob')").unwrap();
        assert_eq!(
            f,
            Formula::atom(
                "P",
                vec![Term::constant("c1"), Term::free("a"), Term::constant("bob")]
            )
        );
    }

    #[test]
    fn sequent_axiom_shape() {
        let p = Formula::prop("p");
        assert_eq!(
            parse_sequent("p => p").unwrap(),
            Sequent::new([p.clone()], [p])
        );
    }

    #[test]
    fn sequent_collapses_duplicates() {
        let p = Formula::prop("p");
        assert_eq!(
            parse_sequent("p, p => p").unwrap(),
            Sequent::new([p.clone()], [p])
        );
    }

    #[test]
    fn cd_sequent() {
        let s = parse_sequent("forall x.(A | B(x)) => A | forall x. B(x)").unwrap();
        assert_eq!(
            s,
            Sequent::new(
                [Formula::forall("x", Formula::or(Formula::prop("A"), bx()))],
                [Formula::or(Formula::prop("A"), Formula::forall("x", bx()))]
            )
        );
    }

    #[test]
    fn empty_sides() {
        let s = parse_sequent("=> p -> p").unwrap();
        assert!(s.antecedent.is_empty());
        let s = parse_sequent("p =>").unwrap();
        assert!(s.succedent.is_empty());
    }

    #[test]
    fn errors() {
        assert_eq!(parse_sequent("   "), Err(ParseError::Empty));
        assert!(matches!(
            parse_formula("p &"),
            Err(ParseError::Syntax { pos: 3, .. })
        ));
        assert!(matches!(
            parse_formula("P(a) & P(a, b)"),
            Err(ParseError::Arity { .. })
        ));
        assert!(matches!(
            parse_formula("P(x) & forall x. Q(x)"),
            Err(ParseError::Namespace { .. })
        ));
        assert!(parse_formula("forall c. P(c)").is_err());
        assert!(parse_sequent("p").is_err());
        assert!(parse_sequent("p => q => r").is_err());
        assert!(parse_formula("T(a)").is_err());
        let deep = format!("{}p{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_formula(&deep).is_err());
    }

    #[test]
    fn unicode_connectives() {
        assert_eq!(
            parse_sequent("∀x.(A ∨ B(x)) ⇒ A ∨ ∀x. B(x)").unwrap(),
            parse_sequent("forall x.(A | B(x)) => A | forall x. B(x)").unwrap()
        );
    }

    #[test]
    fn print_reparses() {
        for src in [
            "forall x. (A | B(x))",
            "(forall x. P(x)) -> forall x. P(x)",
            "p -> q -> r",
            "(p -> q) -> r",
            "a1 & (b1 & c1) | d1",
            "P('bob', c2, a) & T",
            "exists y. forall x. R(x, y)",
        ] {
            let f = parse_formula(src).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{src}");
        }
        let s = parse_sequent("forall x.(A | B(x)) => A | forall x. B(x)").unwrap();
        assert_eq!(parse_sequent(&s.to_string()).unwrap(), s);
    }
}
