use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::prover::{prove, Budget, ProverError};
use crate::syntax::{parse_sequent, CalculusId, Sequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Proved,
    Refuted,
    Unknown,
}

impl Expect {
    pub fn label(self) -> &'static str {
        match self {
            Expect::Proved => "proved",
            Expect::Refuted => "refuted",
            Expect::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Expect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "proved" => Ok(Expect::Proved),
            "refuted" => Ok(Expect::Refuted),
            "unknown" => Ok(Expect::Unknown),
            _ => Err(format!("unknown expectation `{s}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Prover { line: usize, source: ProverError },
}

/// One `EXPECT <verdict> <sequent>` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub line: usize,
    pub expect: Expect,
    pub sequent: Sequent,
}

/// Parses a corpus. Blank lines and `#` comments are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let err = |msg: String| CorpusError::Parse { line, msg };
        let rest = body
            .strip_prefix("EXPECT")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| err("expected `EXPECT proved|refuted|unknown <sequent>`".into()))?
            .trim_start();
        let (word, seq) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let expect = word.parse::<Expect>().map_err(err)?;
        let sequent = parse_sequent(seq.trim()).map_err(|e| err(e.to_string()))?;
        out.push(CorpusEntry {
            line,
            expect,
            sequent,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusLine {
    pub entry: CorpusEntry,
    pub actual: &'static str,
}

impl CorpusLine {
    pub fn passed(&self) -> bool {
        self.entry.expect.label() == self.actual
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusSummary {
    pub lines: Vec<CorpusLine>,
}

impl CorpusSummary {
    pub fn passed(&self) -> usize {
        self.lines.iter().filter(|l| l.passed()).count()
    }

    pub fn failed(&self) -> usize {
        self.lines.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for CorpusSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            let mark = if l.passed() { "ok" } else { "MISMATCH" };
            writeln!(
                f,
                "{:>4} {mark} expected {} got {}: {}",
                l.entry.line, l.entry.expect, l.actual, l.entry.sequent
            )?;
        }
        writeln!(f, "{} passed, {} failed", self.passed(), self.failed())
    }
}

/// Runs every entry of the corpus text under `calculus`.
pub fn run_corpus(
    text: &str,
    calculus: CalculusId,
    budget: Budget,
) -> Result<CorpusSummary, CorpusError> {
    let entries = parse_corpus(text)?;
    let mut lines = Vec::with_capacity(entries.len());
    for entry in entries {
        let verdict =
            prove(&entry.sequent, calculus, budget).map_err(|source| CorpusError::Prover {
                line: entry.line,
                source,
            })?;
        lines.push(CorpusLine {
            actual: verdict.label(),
            entry,
        });
    }
    Ok(CorpusSummary { lines })
}

pub fn run_corpus_file(
    path: &Path,
    calculus: CalculusId,
    budget: Budget,
) -> Result<CorpusSummary, CorpusError> {
    run_corpus(&std::fs::read_to_string(path)?, calculus, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_domain_lines() {
        let text = "# separation\nEXPECT refuted forall x.(A | B(x)) => A | forall x. B(x)\n\nEXPECT proved p => p\n";
        let s = run_corpus(text, CalculusId::QGP, Budget::default()).unwrap();
        assert_eq!(s.lines.len(), 2);
        assert!(s.all_passed(), "{s}");
        let text = "EXPECT proved forall x.(A | B(x)) => A | forall x. B(x)";
        assert!(run_corpus(text, CalculusId::QGPM, Budget::default())
            .unwrap()
            .all_passed());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_corpus("EXPECT proved p => p\nEXPECT maybe p => p").unwrap_err();
        assert!(matches!(e, CorpusError::Parse { line: 2, .. }));
        let e = parse_corpus("\n\nEXPECT proved p =>> p").unwrap_err();
        assert!(matches!(e, CorpusError::Parse { line: 3, .. }));
        assert!(parse_corpus("EXPECTproved p => p").is_err());
    }
}
