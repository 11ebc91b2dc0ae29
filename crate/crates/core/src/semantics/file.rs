//! Text format for models.
//!
//! ```text
//! # two worlds, u below v
//! worlds: u, v
//! order: u <= v
//! domain u: c
//! domain v: c, d
//! const k: c
//! val u: B(c)=1
//! val v: (A -> B(d))=0
//! wd: false
//! ```
//!
//! A file without a `worlds:` line describes a quasi-boolean model and uses
//! `domain:` and `val:` without a world name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{KripkeModel, QuasiBooleanModel};
use crate::syntax::{parse_formula, term_text, Formula, Term, TermStyle};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ModelParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelFile {
    QuasiBoolean(QuasiBooleanModel),
    Kripke(KripkeModel),
}

impl ModelFile {
    /// Kripke view; a quasi-boolean model becomes a one-world model.
    pub fn into_kripke(self) -> KripkeModel {
        match self {
            ModelFile::Kripke(k) => k,
            ModelFile::QuasiBoolean(m) => KripkeModel::from_qb(&m, "w"),
        }
    }
}

#[derive(Default)]
struct Raw {
    worlds: Option<Vec<String>>,
    order: Vec<(String, String)>,
    domains: BTreeMap<Option<String>, BTreeSet<String>>,
    consts: BTreeMap<String, String>,
    vals: BTreeMap<(Option<String>, Formula), bool>,
    wd: bool,
}

pub fn parse_model(text: &str) -> Result<ModelFile, ModelParseError> {
    let mut raw = Raw::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| ModelParseError { line: line_no, msg };
        let line = strip_comment(line).trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| err("expected `keyword: ...`".into()))?;
        let mut words = head.split_whitespace();
        let keyword = words.next().unwrap_or("");
        let arg = words.next();
        if words.next().is_some() {
            return Err(err(format!("unexpected text in `{head}`")));
        }
        let rest = rest.trim();
        match (keyword, arg) {
            ("worlds", None) => {
                if raw.worlds.is_some() {
                    return Err(err("duplicate `worlds:` line".into()));
                }
                raw.worlds = Some(names(rest).map_err(err)?);
            }
            ("order", None) => {
                for pair in rest.split(',') {
                    let (u, v) = pair
                        .split_once("<=")
                        .ok_or_else(|| err(format!("expected `u <= v`, got `{}`", pair.trim())))?;
                    raw.order
                        .push((name(u).map_err(err)?, name(v).map_err(err)?));
                }
            }
            ("domain", w) => {
                let w = w.map(name).transpose().map_err(err)?;
                let d = names(rest).map_err(err)?;
                if raw.domains.insert(w, d.into_iter().collect()).is_some() {
                    return Err(err("duplicate domain".into()));
                }
            }
            ("const", Some(c)) => {
                let c = name(c).map_err(err)?;
                raw.consts.insert(c, name(rest).map_err(err)?);
            }
            ("val", w) => {
                let w = w.map(name).transpose().map_err(err)?;
                let (key, value) = rest
                    .rsplit_once('=')
                    .ok_or_else(|| err("expected `KEY=0` or `KEY=1`".into()))?;
                let value = match value.trim() {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => return Err(err(format!("bad truth value `{other}`"))),
                };
                let key = parse_formula(key.trim()).map_err(|e| err(e.to_string()))?;
                let key = element_key(&key);
                if !key.is_closed()
                    || !matches!(
                        key,
                        Formula::Atom { .. } | Formula::Impl(..) | Formula::Or(..)
                    )
                {
                    return Err(err(format!(
                        "`{}` is not a closed atom, implication or disjunction",
                        key
                    )));
                }
                if raw.vals.insert((w, key), value).is_some() {
                    return Err(err("duplicate valuation entry".into()));
                }
            }
            ("wd", None) => {
                raw.wd = match rest {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    other => return Err(err(format!("bad `wd` value `{other}`"))),
                }
            }
            _ => return Err(err(format!("unknown line kind `{head}`"))),
        }
    }
    build(raw)
}

fn build(raw: Raw) -> Result<ModelFile, ModelParseError> {
    let at_end = |msg: String| ModelParseError { line: 0, msg };
    let Some(worlds) = raw.worlds else {
        if !raw.order.is_empty() {
            return Err(at_end("`order:` needs a `worlds:` line".into()));
        }
        let mut domain = BTreeSet::new();
        for (w, d) in raw.domains {
            if w.is_some() {
                return Err(at_end(
                    "world-specific domain needs a `worlds:` line".into(),
                ));
            }
            domain = d;
        }
        let mut valuation = BTreeMap::new();
        for ((w, k), v) in raw.vals {
            if w.is_some() {
                return Err(at_end(
                    "world-specific valuation needs a `worlds:` line".into(),
                ));
            }
            valuation.insert(k, v);
        }
        return Ok(ModelFile::QuasiBoolean(QuasiBooleanModel {
            domain,
            const_interp: raw.consts,
            valuation,
            wd_mode: raw.wd,
        }));
    };
    let worlds: BTreeSet<String> = worlds.into_iter().collect();
    let known = |w: &String| {
        if worlds.contains(w) {
            Ok(())
        } else {
            Err(at_end(format!("world `{w}` is not listed in `worlds:`")))
        }
    };
    for (u, v) in &raw.order {
        known(u)?;
        known(v)?;
    }
    for w in raw
        .domains
        .keys()
        .flatten()
        .chain(raw.vals.keys().filter_map(|(w, _)| w.as_ref()))
    {
        known(w)?;
    }
    let mut order: BTreeSet<(String, String)> =
        worlds.iter().map(|w| (w.clone(), w.clone())).collect();
    order.extend(raw.order);
    // reflexive-transitive closure
    loop {
        let extra: Vec<(String, String)> = order
            .iter()
            .flat_map(|(a, b)| {
                order
                    .iter()
                    .filter(move |(c, _)| c == b)
                    .map(move |(_, d)| (a.clone(), d.clone()))
            })
            .filter(|p| !order.contains(p))
            .collect();
        if extra.is_empty() {
            break;
        }
        order.extend(extra);
    }
    let mut domains = BTreeMap::new();
    for (w, d) in raw.domains {
        let w = w.ok_or_else(|| at_end("`domain:` needs a world name in a Kripke model".into()))?;
        domains.insert(w, d);
    }
    let mut valuation = BTreeMap::new();
    for ((w, k), v) in raw.vals {
        let w = w.ok_or_else(|| at_end("`val:` needs a world name in a Kripke model".into()))?;
        valuation.insert((w, k), v);
    }
    Ok(ModelFile::Kripke(KripkeModel {
        worlds,
        order,
        domains,
        const_interp: raw.consts,
        valuation,
        wd_mode: raw.wd,
    }))
}

fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_quote => escaped = true,
            '\'' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Treats every non-bound term of a parsed key as a domain element.
fn element_key(f: &Formula) -> Formula {
    f.map_terms(&mut |t| match t {
        Term::Free(n) | Term::Const(n) => Term::Const(n.clone()),
        b => b.clone(),
    })
}

fn name(s: &str) -> Result<String, String> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('\'').and_then(|r| r.strip_suffix('\'')) {
        let mut out = String::new();
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => out.push(chars.next().ok_or("dangling escape")?),
                '\'' => return Err(format!("unescaped quote in `{s}`")),
                c => out.push(c),
            }
        }
        if out.is_empty() {
            return Err("empty name".into());
        }
        Ok(out)
    } else if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(s.to_owned())
    } else {
        Err(format!("bad name `{s}`"))
    }
}

fn names(s: &str) -> Result<Vec<String>, String> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(name).collect()
}

fn write_name(out: &mut String, n: &str) {
    out.push_str(&term_text(&Term::Free(n.to_owned()), TermStyle::Bare));
}

fn write_names<'a>(out: &mut String, ns: impl IntoIterator<Item = &'a String>) {
    for (i, n) in ns.into_iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_name(out, n);
    }
}

fn key_text(k: &Formula) -> String {
    match k {
        Formula::Atom { .. } => k.to_text(TermStyle::Bare),
        _ => k.to_key_text(),
    }
}

impl fmt::Display for QuasiBooleanModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        if self.wd_mode {
            s.push_str("wd: true\n");
        }
        s.push_str("domain: ");
        write_names(&mut s, &self.domain);
        s.push('\n');
        for (c, e) in &self.const_interp {
            s.push_str("const ");
            write_name(&mut s, c);
            s.push_str(": ");
            write_name(&mut s, e);
            s.push('\n');
        }
        for (k, v) in &self.valuation {
            writeln!(s, "val: {}={}", key_text(k), u8::from(*v))?;
        }
        f.write_str(&s)
    }
}

impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        if self.wd_mode {
            s.push_str("wd: true\n");
        }
        s.push_str("worlds: ");
        write_names(&mut s, &self.worlds);
        s.push('\n');
        for (u, v) in self.order.iter().filter(|(u, v)| u != v) {
            s.push_str("order: ");
            write_name(&mut s, u);
            s.push_str(" <= ");
            write_name(&mut s, v);
            s.push('\n');
        }
        for (w, d) in &self.domains {
            s.push_str("domain ");
            write_name(&mut s, w);
            s.push_str(": ");
            write_names(&mut s, d);
            s.push('\n');
        }
        for (c, e) in &self.const_interp {
            s.push_str("const ");
            write_name(&mut s, c);
            s.push_str(": ");
            write_name(&mut s, e);
            s.push('\n');
        }
        for ((w, k), v) in &self.valuation {
            s.push_str("val ");
            write_name(&mut s, w);
            writeln!(s, ": {}={}", key_text(k), u8::from(*v))?;
        }
        f.write_str(&s)
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFile::QuasiBoolean(m) => m.fmt(f),
            ModelFile::Kripke(m) => m.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{check_kripke_model, eval_kripke};

    const CD: &str = "\
# constant domain fails here
worlds: u, v
order: u <= v
domain u: c
domain v: c, d
val u: A=0
val v: A=1
val u: B(c)=1
val v: B(c)=1
val v: B(d)=0
";

    #[test]
    fn kripke_round_trip() {
        let m = parse_model(CD).unwrap();
        let ModelFile::Kripke(k) = &m else {
            panic!("expected Kripke model")
        };
        assert!(check_kripke_model(k).is_empty());
        let f = parse_formula("A | forall x. B(x)").unwrap();
        assert_eq!(eval_kripke(k, "u", &f), Ok(false));
        assert_eq!(parse_model(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn qb_round_trip() {
        let text = "domain: u, 'odd name'\nval: (p -> P(u))=1\nval: P('odd name')=0\nconst c1: u\n";
        let m = parse_model(text).unwrap();
        assert!(matches!(m, ModelFile::QuasiBoolean(_)));
        assert_eq!(parse_model(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_model("worlds: u\nbogus line\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_model("val: p=2").is_err());
        assert!(parse_model("val: forall x. P(x)=1").is_err());
    }

    #[test]
    fn unlisted_worlds_are_rejected() {
        assert!(parse_model("worlds: a\norder: u <= u\n").is_err());
        assert!(parse_model("worlds: a\ndomain b: e0\n").is_err());
        assert!(parse_model("worlds: a\nval b: p=1\n").is_err());
    }
}
