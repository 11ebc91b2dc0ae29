//! Test-support machinery: random models, the disjunction-property model
//! construction and the corpus runner.

mod corpus;
mod dp;
mod gen;

use std::collections::{BTreeMap, BTreeSet};

pub use corpus::{
    parse_corpus, run_corpus, run_corpus_file, CorpusEntry, CorpusError, CorpusLine, CorpusSummary,
    Expect,
};
pub use dp::{
    build_dp_model, check_dp_agreement, dp_split, Agreement, Choice, DpError, DpModel, DpReport,
    NEW_ELEMENT,
};
pub use gen::{gen_kripke_model, gen_qb_model, KripkeShape, Signature};

use crate::semantics::{valuation_keys, EvalError};
use crate::syntax::{Formula, Term};

/// Ground keys of `f` over `domain` for every assignment of its free
/// variables, with constants read through `interp`.
pub(crate) fn keys_of(
    f: &Formula,
    domain: &BTreeSet<String>,
    interp: &BTreeMap<String, String>,
    wd: bool,
    out: &mut BTreeSet<Formula>,
) -> Result<(), EvalError> {
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    let mut stack: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for v in &vars {
        stack = stack
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
    for a in stack {
        let mut err = None;
        let g = f.map_terms(&mut |t| match t {
            Term::Const(c) => match interp.get(c) {
                Some(e) => Term::Const(e.clone()),
                None if domain.contains(c) => t.clone(),
                None => {
                    err.get_or_insert(EvalError::Uninterpreted(c.clone()));
                    t.clone()
                }
            },
            Term::Free(x) => Term::Const(a[x].clone()),
            Term::Bound(_) => t.clone(),
        });
        if let Some(e) = err {
            return Err(e);
        }
        valuation_keys(&g, domain, wd, out);
    }
    Ok(())
}

/// Keys ordered so that every key comes after its subformulas.
pub(crate) fn by_height(keys: BTreeSet<Formula>) -> Vec<Formula> {
    let mut v: Vec<Formula> = keys.into_iter().collect();
    v.sort_by_key(|k| k.height());
    v
}
