use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{by_height, keys_of};
use crate::semantics::{KripkeModel, QuasiBooleanModel};
use crate::syntax::{Formula, Sequent};

/// Formulas a generated model must be able to evaluate. Constants are
/// collected from the formulas; free variables range over the domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub formulas: Vec<Formula>,
    pub weak_disjunction: bool,
}

impl Signature {
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Self {
        Signature {
            formulas: formulas.into_iter().collect(),
            weak_disjunction: false,
        }
    }

    pub fn of_sequents<'a>(sequents: impl IntoIterator<Item = &'a Sequent>) -> Self {
        Signature::new(
            sequents
                .into_iter()
                .flat_map(|s| s.formulas().cloned().collect::<Vec<_>>()),
        )
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.formulas.iter().flat_map(Formula::constants).collect()
    }
}

fn element(i: usize) -> String {
    format!("e{i}")
}

/// A random quasi-boolean model over `domain_size` elements (at least one)
/// that passes the model checker. Values are drawn bottom-up; a value forced
/// by a model condition overrides the draw.
pub fn gen_qb_model(seed: u64, signature: &Signature, domain_size: usize) -> QuasiBooleanModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain: BTreeSet<String> = (0..domain_size.max(1)).map(element).collect();
    let elems: Vec<String> = domain.iter().cloned().collect();
    let mut m = QuasiBooleanModel::new(domain.clone());
    m.wd_mode = signature.weak_disjunction;
    for c in signature.constants() {
        let e = elems[rng.gen_range(0..elems.len())].clone();
        m.const_interp.insert(c, e);
    }
    let mut keys = BTreeSet::new();
    for f in &signature.formulas {
        keys_of(f, &domain, &m.const_interp, m.wd_mode, &mut keys)
            .expect("constants are interpreted");
    }
    for k in by_height(keys) {
        let draw: bool = rng.gen();
        let v = match &k {
            Formula::Impl(a, b) => {
                let (a, b) = (
                    m.eval_ground(a).expect("subkeys first"),
                    m.eval_ground(b).expect("subkeys first"),
                );
                b || (!a && draw)
            }
            Formula::Or(l, r) => {
                let either = m.eval_ground(l).expect("subkeys first")
                    || m.eval_ground(r).expect("subkeys first");
                either || draw
            }
            _ => draw,
        };
        m.valuation.insert(k, v);
    }
    m
}

/// Bounds for [`gen_kripke_model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KripkeShape {
    /// Number of worlds, clamped to `1..=4`.
    pub worlds: usize,
    /// Elements present in every world (at least one).
    pub base_domain: usize,
    /// Most elements a world adds to those of the worlds below it.
    pub max_new: usize,
}

impl Default for KripkeShape {
    fn default() -> Self {
        KripkeShape {
            worlds: 3,
            base_domain: 1,
            max_new: 1,
        }
    }
}

/// A random Kripke model passing the model checker. The order only relates
/// `w_i <= w_j` for `i <= j`; domains grow along it. Values are chosen from
/// the top worlds down so that monotonicity and the implication conditions
/// can always be met.
pub fn gen_kripke_model(seed: u64, signature: &Signature, shape: KripkeShape) -> KripkeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.worlds.clamp(1, 4);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut below: Vec<BTreeSet<usize>> = (0..n).map(|j| BTreeSet::from([j])).collect();
    for j in 1..n {
        for i in 0..j {
            if rng.gen_bool(0.5) {
                let lower = below[i].clone();
                below[j].extend(lower);
            }
        }
    }
    let mut m = KripkeModel {
        wd_mode: signature.weak_disjunction,
        ..KripkeModel::default()
    };
    m.worlds = names.iter().cloned().collect();
    for (j, b) in below.iter().enumerate() {
        for &i in b {
            m.order.insert((names[i].clone(), names[j].clone()));
        }
    }
    let base: Vec<String> = (0..shape.base_domain.max(1)).map(element).collect();
    let mut next = base.len();
    for j in 0..n {
        let mut d: BTreeSet<String> = base.iter().cloned().collect();
        for &i in &below[j] {
            if i != j {
                d.extend(m.domains[&names[i]].iter().cloned());
            }
        }
        for _ in 0..rng.gen_range(0..=shape.max_new) {
            d.insert(element(next));
            next += 1;
        }
        m.domains.insert(names[j].clone(), d);
    }
    for c in signature.constants() {
        m.const_interp
            .insert(c, base[rng.gen_range(0..base.len())].clone());
    }
    for j in (0..n).rev() {
        let u = names[j].clone();
        let mut keys = BTreeSet::new();
        for f in &signature.formulas {
            keys_of(f, &m.domains[&u], &m.const_interp, m.wd_mode, &mut keys)
                .expect("constants are interpreted");
        }
        let above: Vec<String> = (j + 1..n)
            .filter(|&k| below[k].contains(&j))
            .map(|k| names[k].clone())
            .collect();
        for k in by_height(keys) {
            let draw: bool = rng.gen();
            let all_above = above
                .iter()
                .all(|v| m.valuation.get(&(v.clone(), k.clone())) == Some(&true));
            let v = match &k {
                Formula::Impl(a, b) => {
                    let holds = m.force(&u, b).expect("subkeys first");
                    let safe = std::iter::once(&u).chain(above.iter()).all(|v| {
                        !m.force(v, a).expect("subkeys first")
                            || m.force(v, b).expect("subkeys first")
                    });
                    holds || (safe && all_above && draw)
                }
                Formula::Or(l, r) => {
                    let either = m.force(&u, l).expect("subkeys first")
                        || m.force(&u, r).expect("subkeys first");
                    either || (all_above && draw)
                }
                _ => all_above && draw,
            };
            m.valuation.insert((u.clone(), k), v);
        }
    }
    m
}
