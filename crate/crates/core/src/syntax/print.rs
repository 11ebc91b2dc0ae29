use std::fmt::{self, Write as _};

use super::{Formula, Sequent, Term};

/// How constants are rendered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermStyle {
    /// Constants not spelled `c...` are quoted so the text reparses to the
    /// same term kind.
    Canonical,
    /// Every name is written bare when it is a plain identifier. Used for
    /// model files, where term names denote domain elements.
    Bare,
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_reserved(s)
}

pub(crate) fn is_reserved(s: &str) -> bool {
    matches!(s, "T" | "forall" | "exists")
}

fn quoted(out: &mut String, name: &str) {
    out.push('\'');
    for c in name.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
}

fn write_term(out: &mut String, t: &Term, style: TermStyle) {
    match (t, style) {
        (Term::Const(n), TermStyle::Canonical) if is_ident(n) && n.starts_with('c') => {
            out.push_str(n)
        }
        (Term::Const(n), TermStyle::Canonical) => quoted(out, n),
        (Term::Const(n) | Term::Free(n), TermStyle::Bare) if !is_ident(n) => quoted(out, n),
        (Term::Const(n) | Term::Free(n) | Term::Bound(n), _) => out.push_str(n),
    }
}

// Binding strength; quantifiers bind weakest and get parenthesized whenever
// they are an operand of a binary connective.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Impl(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Top | Formula::Atom { .. } => 4,
    }
}

pub(crate) fn term_text(t: &Term, style: TermStyle) -> String {
    let mut s = String::new();
    write_term(&mut s, t, style);
    s
}

pub(crate) fn write_formula(out: &mut String, f: &Formula, ctx: u8, style: TermStyle) {
    let parens = prec(f) < ctx;
    if parens {
        out.push('(');
    }
    match f {
        Formula::Top => out.push('T'),
        Formula::Atom { pred, args } => {
            out.push_str(pred);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(out, a, style);
                }
                out.push(')');
            }
        }
        Formula::And(l, r) => {
            write_formula(out, l, 3, style);
            out.push_str(" & ");
            write_formula(out, r, 4, style);
        }
        Formula::Or(l, r) => {
            write_formula(out, l, 2, style);
            out.push_str(" | ");
            write_formula(out, r, 3, style);
        }
        Formula::Impl(l, r) => {
            write_formula(out, l, 2, style);
            out.push_str(" -> ");
            write_formula(out, r, 1, style);
        }
        Formula::Forall(x, b) | Formula::Exists(x, b) => {
            out.push_str(if matches!(f, Formula::Forall(..)) {
                "forall "
            } else {
                "exists "
            });
            out.push_str(x);
            out.push_str(". ");
            write_formula(out, b, 0, style);
        }
    }
    if parens {
        out.push(')');
    }
}

impl Formula {
    pub fn to_text(&self, style: TermStyle) -> String {
        let mut s = String::new();
        write_formula(&mut s, self, 0, style);
        s
    }

    /// Rendering as an operand: atoms bare, everything else parenthesized.
    pub fn to_key_text(&self) -> String {
        let mut s = String::new();
        write_formula(&mut s, self, 4, TermStyle::Bare);
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, TermStyle::Canonical);
        f.write_str(&s)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(TermStyle::Canonical))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (i, a) in self.antecedent.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            write!(s, "{a}")?;
        }
        if !self.antecedent.is_empty() {
            s.push(' ');
        }
        s.push_str("=>");
        for (i, a) in self.succedent.iter().enumerate() {
            s.push_str(if i == 0 { " " } else { ", " });
            write!(s, "{a}")?;
        }
        f.write_str(&s)
    }
}
