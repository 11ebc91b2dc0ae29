//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use primal_core::calculus::{
    check_derivation, derivation_from_json, eliminate_cut, Derivation, RuleId,
};
use primal_core::harness::{
    build_dp_model, check_dp_agreement, dp_split, gen_kripke_model, gen_qb_model, parse_corpus,
    Choice, KripkeShape, Signature,
};
use primal_core::prover::{build_reduction_tree, prove, Budget, Verdict};
use primal_core::semantics::{
    check_qb_valuation, eval_kripke, parse_model, sequent_valid_kripke, sequent_valid_qb, ModelFile,
};
use primal_core::syntax::{parse_formula, parse_sequent, CalculusId, Formula, Sequent};
use primal_core::transform::{fold, gentzen_to_nd, nd_to_gentzen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const CD: &str = "forall x.(A | B(x)) => A | forall x. B(x)";

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn corpus(name: &str) -> Vec<Sequent> {
    let text = std::fs::read_to_string(data(name)).expect("corpus file");
    parse_corpus(&text)
        .expect("corpus parses")
        .into_iter()
        .map(|e| e.sequent)
        .collect()
}

fn seq(s: &str) -> Sequent {
    parse_sequent(s).expect("sequent")
}

fn f(s: &str) -> Formula {
    parse_formula(s).expect("formula")
}

fn primal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primal"))
        .args(args)
        .output()
        .expect("run primal")
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn proof(s: &Sequent, calc: CalculusId) -> Result<Derivation, String> {
    match prove(s, calc, Budget::default()).map_err(|e| e.to_string())? {
        Verdict::Proved(d) => Ok(d),
        v => Err(format!(
            "{s}: expected proved under {calc}, got {}",
            v.label()
        )),
    }
}

fn timed<T>(limit: Duration, what: &str, run: impl FnOnce() -> T) -> Result<T, String> {
    let start = Instant::now();
    let out = run();
    let spent = start.elapsed();
    ensure(spent < limit, || format!("{what} took {spent:?}"))?;
    Ok(out)
}

fn c1_cd_separation() -> Outcome {
    let s = seq(CD);
    let budget = Budget::with_steps(10_000);
    let m = timed(Duration::from_secs(1), "QGPM", || {
        prove(&s, CalculusId::QGPM, budget)
    })?
    .map_err(|e| e.to_string())?;
    ensure(m.is_proved(), || format!("QGPM gave {}", m.label()))?;
    let g = timed(Duration::from_secs(1), "QGP", || {
        prove(&s, CalculusId::QGP, budget)
    })?
    .map_err(|e| e.to_string())?;
    ensure(g.is_refuted(), || format!("QGP gave {}", g.label()))?;
    Ok("proved in QGPM, refuted in QGP".into())
}

fn c2_primal_implication() -> Outcome {
    let start = Instant::now();
    for calc in CalculusId::ALL {
        for (text, proved) in [
            ("=> p -> p", false),
            ("q => p -> q", true),
            ("p, p -> q => q", true),
        ] {
            let v = prove(&seq(text), calc, Budget::default()).map_err(|e| e.to_string())?;
            let ok = if proved {
                v.is_proved()
            } else {
                v.is_refuted()
            };
            ensure(ok, || format!("{calc} on `{text}` gave {}", v.label()))?;
        }
    }
    let spent = start.elapsed();
    ensure(spent < Duration::from_secs(1), || format!("took {spent:?}"))?;
    Ok(format!("30 verdicts in {spent:?}"))
}

fn c3_deduction_failure() -> Outcome {
    let s = seq("=> forall x. P(x) -> forall x. P(x)");
    let also = seq("=> (forall x. P(x)) -> forall x. P(x)");
    for calc in [CalculusId::QGP, CalculusId::QGPM] {
        for s in [&s, &also] {
            let v = prove(s, calc, Budget::default()).map_err(|e| e.to_string())?;
            ensure(v.is_refuted(), || {
                format!("{calc} on {s} gave {}", v.label())
            })?;
        }
    }
    Ok("refuted in QGP and QGPM".into())
}

fn c4_hand_cd_derivation() -> Outcome {
    let file = data("cd_qgpm.json");
    let out = primal(&["check-proof", p(&file), "--calculus", "qgpm"]);
    ensure(out.status.code() == Some(0), || {
        String::from_utf8_lossy(&out.stdout).into_owned()
    })?;
    let d = derivation_from_json(&std::fs::read_to_string(&file).unwrap())
        .map_err(|e| e.to_string())?;
    ensure(d.conclusion == seq(CD), || {
        format!("endsequent {}", d.conclusion)
    })?;
    ensure(!d.has_cut(), || "has a cut".into())?;
    Ok("check-proof --calculus qgpm accepts it".into())
}

fn c5_multi_single_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let multi = corpus("qgpm_provable.txt");
    ensure(multi.len() >= 20 && multi.contains(&seq(CD)), || {
        "corpus too small".into()
    })?;
    for (i, s) in multi.iter().enumerate() {
        let src = dir.path().join(format!("m{i}.json"));
        let out = primal(&[
            "prove",
            &s.to_string(),
            "--calculus",
            "qgpm",
            "--emit-proof",
            p(&src),
        ]);
        ensure(out.status.code() == Some(0), || format!("{s}: not proved"))?;
        let out = primal(&[
            "translate",
            "--from",
            "qgpm",
            "--to",
            "qgp",
            "--proof",
            p(&src),
        ]);
        ensure(out.status.code() == Some(0), || {
            format!("{s}: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        let report: serde_json::Value =
            serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let target = dir.path().join(format!("t{i}.json"));
        std::fs::write(&target, report["derivation"].to_string()).map_err(|e| e.to_string())?;
        let args = [
            "check-proof",
            p(&target),
            "--calculus",
            "qgp",
            "--allow-cut",
            "--allow-cd",
        ];
        let out = primal(&args);
        ensure(out.status.code() == Some(0), || {
            format!("{s}: {}", String::from_utf8_lossy(&out.stdout))
        })?;
        let d = derivation_from_json(&std::fs::read_to_string(&target).unwrap())
            .map_err(|e| e.to_string())?;
        let want = Sequent::single(
            s.antecedent.iter().cloned(),
            fold(&s.succedent).expect("non-empty"),
        );
        ensure(d.conclusion == want, || {
            format!("{s}: endsequent {}", d.conclusion)
        })?;
    }
    let single = corpus("qgp_provable.txt");
    for (i, s) in single.iter().enumerate() {
        let src = dir.path().join(format!("g{i}.json"));
        let dst = dir.path().join(format!("gm{i}.json"));
        ensure(
            primal(&["prove", &s.to_string(), "--emit-proof", p(&src)])
                .status
                .code()
                == Some(0),
            || format!("{s}: not proved in QGP"),
        )?;
        let args = [
            "translate",
            "--from",
            "qgp",
            "--to",
            "qgpm",
            "--proof",
            p(&src),
            "--output",
            p(&dst),
        ];
        ensure(primal(&args).status.code() == Some(0), || {
            format!("{s}: translation failed")
        })?;
        let out = primal(&["check-proof", p(&dst), "--calculus", "qgpm"]);
        ensure(out.status.code() == Some(0), || {
            format!("{s}: {}", String::from_utf8_lossy(&out.stdout))
        })?;
    }
    Ok(format!(
        "{} multi-conclusion and {} single-conclusion proofs",
        multi.len(),
        single.len()
    ))
}

fn c6_nd_round_trip() -> Outcome {
    let sequents = corpus("qgp_provable.txt");
    ensure(sequents.len() >= 20, || "corpus too small".into())?;
    for s in &sequents {
        let g = proof(s, CalculusId::QGP)?;
        let nd = gentzen_to_nd(&g).map_err(|e| format!("{s}: {e}"))?;
        check_derivation(&nd, CalculusId::QP, false).map_err(|e| format!("{s}: nd {e}"))?;
        ensure(nd.conclusion == *s, || {
            format!("{s}: nd endsequent {}", nd.conclusion)
        })?;
        let back = nd_to_gentzen(&nd).map_err(|e| format!("{s}: {e}"))?;
        check_derivation(&back, CalculusId::QGP, false).map_err(|e| format!("{s}: gentzen {e}"))?;
        ensure(back.conclusion == *s, || {
            format!("{s}: gentzen endsequent {}", back.conclusion)
        })?;
        let nd = proof(s, CalculusId::QP)?;
        check_derivation(&nd, CalculusId::QP, false).map_err(|e| format!("{s}: search nd {e}"))?;
    }
    Ok(format!("{} sequents both ways", sequents.len()))
}

/// Ways to route `goal` through a lemma: the lemma and its two premises are
/// all provable from the context plus what is already there.
#[derive(Clone, Copy)]
enum Lemma {
    Conj,
    Disj,
    Guard,
    Vacuous,
}

fn lemma(kind: Lemma, goal: &Formula) -> Formula {
    match kind {
        Lemma::Conj => Formula::and(goal.clone(), Formula::Top),
        Lemma::Disj => Formula::or(goal.clone(), goal.clone()),
        Lemma::Guard => Formula::imp(Formula::Top, goal.clone()),
        Lemma::Vacuous => Formula::forall("z", goal.clone()),
    }
}

/// A QGP proof of `gamma => goal` whose left branch routes through the
/// lemmas in `left`, and whose right premise (first cut only) through `right`.
fn with_cuts(
    gamma: &BTreeSet<Formula>,
    goal: &Formula,
    left: &[Lemma],
    right: &[Lemma],
) -> Result<Derivation, String> {
    let Some((&first, rest)) = left.split_first() else {
        return proof(
            &Sequent::single(gamma.iter().cloned(), goal.clone()),
            CalculusId::QGP,
        );
    };
    let theta = lemma(first, goal);
    let l = with_cuts(gamma, &theta, rest, &[])?;
    let mut extended = gamma.clone();
    extended.insert(theta.clone());
    let r = with_cuts(&extended, goal, right, &[])?;
    Ok(Derivation::new(
        Sequent::single(gamma.iter().cloned(), goal.clone()),
        RuleId::Cut,
        vec![l, r],
    )
    .with_principal(theta))
}

/// The primal-implication configuration: `G => a -> b` from `G => b`, cut
/// against `(->L)` with premises `G, b => b` and `G => a`.
fn implication_cut() -> Derivation {
    let left = Derivation::new(
        seq("a, b => a -> b"),
        RuleId::ImplRp,
        vec![Derivation::axiom(f("b")).weaken_to(&seq("a, b => b"))],
    )
    .with_principal(f("a -> b"));
    let right = Derivation::new(
        seq("a, b, a -> b => b"),
        RuleId::ImplL,
        vec![
            Derivation::axiom(f("b")).weaken_to(&seq("a, b, a -> b => b")),
            Derivation::axiom(f("a")).weaken_to(&seq("a, b, a -> b => a")),
        ],
    )
    .with_principal(f("a -> b"));
    Derivation::new(seq("a, b => b"), RuleId::Cut, vec![left, right]).with_principal(f("a -> b"))
}

fn c7_cut_elimination() -> Outcome {
    use Lemma::*;
    let shapes: [(&[Lemma], &[Lemma]); 8] = [
        (&[Conj], &[]),
        (&[Disj], &[]),
        (&[Guard], &[]),
        (&[Vacuous], &[]),
        (&[Guard, Conj], &[]),
        (&[Disj, Guard], &[]),
        (&[Guard], &[Guard]),
        (&[Conj, Guard], &[Disj]),
    ];
    let mut proofs = vec![implication_cut()];
    for (i, s) in corpus("qgp_provable.txt").iter().enumerate() {
        let goal = s.sole_succedent().expect("single succedent");
        let (l, r) = shapes[i % shapes.len()];
        proofs.push(with_cuts(&s.antecedent, goal, l, r)?);
    }
    let mut cuts_by_count = [0usize; 4];
    for d in &proofs {
        check_derivation(d, CalculusId::QGP, true)
            .map_err(|e| format!("{}: input {e}", d.conclusion))?;
        let n = d.count_rule(RuleId::Cut);
        ensure((1..=3).contains(&n), || {
            format!("{}: {n} cuts", d.conclusion)
        })?;
        cuts_by_count[n] += 1;
        let out = timed(Duration::from_secs(1), "eliminate_cut", || eliminate_cut(d))?
            .map_err(|e| format!("{}: {e}", d.conclusion))?;
        ensure(!out.has_cut(), || format!("{}: cut left", d.conclusion))?;
        ensure(out.conclusion == d.conclusion, || {
            format!("{}: endsequent changed", d.conclusion)
        })?;
        check_derivation(&out, CalculusId::QGP, false)
            .map_err(|e| format!("{}: output {e}", d.conclusion))?;
    }
    ensure(proofs.len() >= 20, || "too few proofs".into())?;
    Ok(format!(
        "{} proofs ({} with 1 cut, {} with 2, {} with 3)",
        proofs.len(),
        cuts_by_count[1],
        cuts_by_count[2],
        cuts_by_count[3]
    ))
}

fn c8_soundness() -> Outcome {
    let start = Instant::now();
    let sequents = corpus("provable.txt");
    ensure(sequents.len() >= 50, || "corpus too small".into())?;
    // Single-conclusion proofs are sound for both semantics; multi-conclusion
    // ones only for quasi-boolean models.
    let mut both = Vec::new();
    let mut qb_only = Vec::new();
    for s in &sequents {
        if s.succedent.len() == 1
            && prove(s, CalculusId::QGP, Budget::default())
                .unwrap()
                .is_proved()
        {
            both.push(s.clone());
        } else if prove(s, CalculusId::QGPM, Budget::default())
            .unwrap()
            .is_proved()
        {
            qb_only.push(s.clone());
        } else {
            return Err(format!("{s} is not proved"));
        }
    }
    let sig = Signature::of_sequents(&sequents);
    for seed in 0..500u64 {
        let m = gen_qb_model(seed, &sig, 1 + (seed as usize % 3));
        for s in both.iter().chain(&qb_only) {
            let ok = sequent_valid_qb(&m, s).map_err(|e| e.to_string())?;
            ensure(ok, || {
                format!("{s} fails in quasi-boolean model {seed}:\n{m}")
            })?;
        }
    }
    for seed in 0..200u64 {
        let shape = KripkeShape {
            worlds: 1 + (seed as usize % 4),
            base_domain: 1 + (seed as usize % 2),
            max_new: 1,
        };
        let m = gen_kripke_model(seed, &sig, shape);
        for s in &both {
            let ok = sequent_valid_kripke(&m, s).map_err(|e| e.to_string())?;
            ensure(ok, || format!("{s} fails in Kripke model {seed}:\n{m}"))?;
        }
    }
    let spent = start.elapsed();
    ensure(spent < Duration::from_secs(60), || {
        format!("took {spent:?}")
    })?;
    Ok(format!(
        "{} + {} sequents, 500 + 200 models, {spent:?}",
        both.len(),
        qb_only.len()
    ))
}

fn c9_countermodels() -> Outcome {
    let sequents = corpus("unprovable.txt");
    let mut refuted = 0;
    for s in &sequents {
        match build_reduction_tree(s, Budget::default()).map_err(|e| e.to_string())? {
            Verdict::Refuted { model, .. } => {
                let m = model.ok_or_else(|| format!("{s}: no model"))?;
                let v = check_qb_valuation(&m);
                ensure(v.is_empty(), || format!("{s}: {v:?}"))?;
                ensure(!sequent_valid_qb(&m, s).map_err(|e| e.to_string())?, || {
                    format!("{s}: model validates it")
                })?;
                refuted += 1;
            }
            v => return Err(format!("{s}: {}", v.label())),
        }
    }
    ensure(refuted >= 30, || format!("only {refuted} refuted"))?;
    Ok(format!("{refuted} countermodels check and falsify"))
}

fn c10_semantic_gap() -> Outcome {
    let text = std::fs::read_to_string(data("cd_kripke.txt")).unwrap();
    let ModelFile::Kripke(k) = parse_model(&text).map_err(|e| e.to_string())? else {
        return Err("not a Kripke model".into());
    };
    let v = primal_core::semantics::check_kripke_model(&k);
    ensure(v.is_empty(), || format!("{v:?}"))?;
    let s = seq(CD);
    let lhs = s.antecedent.iter().next().unwrap();
    let rhs = s.succedent.iter().next().unwrap();
    ensure(
        eval_kripke(&k, "u", lhs).map_err(|e| e.to_string())?,
        || "premise false at u".into(),
    )?;
    ensure(
        !eval_kripke(&k, "u", rhs).map_err(|e| e.to_string())?,
        || "conclusion true at u".into(),
    )?;
    let sig = Signature::of_sequents([&s]);
    for seed in 0..500u64 {
        let m = gen_qb_model(seed, &sig, 1 + (seed as usize % 4));
        ensure(sequent_valid_qb(&m, &s).map_err(|e| e.to_string())?, || {
            format!("quasi-boolean model {seed}")
        })?;
    }
    Ok("two-world model refutes CD; 500 quasi-boolean models validate it".into())
}

fn random_formula(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    const ATOMS: [&str; 3] = ["p", "q", "r"];
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.05) {
            Formula::Top
        } else {
            Formula::prop(ATOMS[rng.gen_range(0..ATOMS.len())])
        };
    }
    let l = random_formula(rng, depth - 1);
    let r = random_formula(rng, depth - 1);
    match rng.gen_range(0..3) {
        0 => Formula::and(l, r),
        1 => Formula::or(l, r),
        _ => Formula::imp(l, r),
    }
}

fn random_harrop(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    const ATOMS: [&str; 4] = ["p", "q", "r", "s"];
    if depth == 0 || rng.gen_bool(0.35) {
        return Formula::prop(ATOMS[rng.gen_range(0..ATOMS.len())]);
    }
    match rng.gen_range(0..3) {
        0 => Formula::and(random_harrop(rng, depth - 1), random_harrop(rng, depth - 1)),
        1 => Formula::imp(
            random_formula(rng, depth - 1),
            random_harrop(rng, depth - 1),
        ),
        _ => {
            let body = random_harrop(rng, depth - 1);
            Formula::forall(
                "x",
                Formula::and(
                    body,
                    Formula::atom("P", vec![primal_core::syntax::Term::Bound("x".into())]),
                ),
            )
        }
    }
}

fn c11_propositional_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut decided, mut agree, mut proved) = (0, 0, 0);
    for _ in 0..200 {
        let gamma: BTreeSet<Formula> = (0..rng.gen_range(0..=3))
            .map(|_| random_formula(&mut rng, 2))
            .collect();
        let delta: BTreeSet<Formula> = (0..rng.gen_range(1..=3))
            .map(|_| random_formula(&mut rng, 2))
            .collect();
        let multi = Sequent::new(gamma.clone(), delta.clone());
        let single = Sequent::single(gamma, fold(&delta).expect("non-empty"));
        let m = prove(&multi, CalculusId::GPM, Budget::default()).map_err(|e| e.to_string())?;
        let g = prove(&single, CalculusId::GP, Budget::default()).map_err(|e| e.to_string())?;
        if m.is_unknown() || g.is_unknown() {
            continue;
        }
        decided += 1;
        proved += usize::from(m.is_proved());
        if m.is_proved() == g.is_proved() {
            agree += 1;
        } else {
            return Err(format!("{multi}: GPM {} but GP {}", m.label(), g.label()));
        }
    }
    ensure(decided >= 180, || format!("only {decided} of 200 decided"))?;
    Ok(format!(
        "{agree}/{decided} agree ({proved} proved), {decided} of 200 decided"
    ))
}

fn c12_disjunction_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let budget = Budget::default();
    let (mut instances, mut tries, mut checked, mut skipped) = (0, 0, 0, 0);
    while instances < 50 {
        tries += 1;
        ensure(tries < 20_000, || {
            format!("only {instances} instances found")
        })?;
        let calc = if tries % 2 == 0 {
            CalculusId::QGP
        } else {
            CalculusId::QGPM
        };
        let gamma: BTreeSet<Formula> = (0..rng.gen_range(1..=3))
            .map(|_| random_harrop(&mut rng, 2))
            .collect();
        let alpha = random_formula(&mut rng, 2);
        let beta = random_formula(&mut rng, 2);
        let r = dp_split(&gamma, &alpha, &beta, calc, budget).map_err(|e| e.to_string())?;
        if !r.disjunction.is_proved() {
            continue;
        }
        instances += 1;
        ensure(matches!(r.chosen, Choice::Left | Choice::Right), || {
            format!(
                "{gamma:?} => {alpha} | {beta} under {calc}: {}",
                r.chosen.label()
            )
        })?;
        let mut pool: Vec<Formula> = vec![
            alpha.clone(),
            beta.clone(),
            Formula::or(alpha.clone(), beta.clone()),
        ];
        pool.extend(gamma.iter().cloned());
        pool.extend((0..6).map(|_| random_formula(&mut rng, 2)));
        pool.extend((0..4).map(|_| random_harrop(&mut rng, 2)));
        let m = build_dp_model(&gamma, &alpha, &beta, &pool, calc, budget)
            .map_err(|e| e.to_string())?;
        let a = check_dp_agreement(&m, &pool, budget).map_err(|e| e.to_string())?;
        ensure(
            a.harrop_mismatches.is_empty() && a.truth_not_derivable.is_empty(),
            || {
                format!(
                    "{gamma:?} under {calc}: {:?} {:?}",
                    a.harrop_mismatches, a.truth_not_derivable
                )
            },
        )?;
        checked += a.checked;
        skipped += a.skipped;
    }
    Ok(format!(
        "{instances} instances from {tries} draws; {checked} pool checks, {skipped} skipped"
    ))
}

fn c13_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |n: &str| dir.path().join(n);
    std::fs::write(d("gamma.txt"), "p -> q\np\n").unwrap();
    let cd = data("cd_qgpm.json");
    let qb = data("cd_kripke.txt");
    let unprovable = data("unprovable.txt");
    // First pass writes the files the later commands read.
    let setup: Vec<Vec<String>> = vec![
        vec![
            "prove".into(),
            CD.into(),
            "--calculus".into(),
            "qgpm".into(),
            "--emit-proof".into(),
            p(&d("m.json")).into(),
        ],
        vec![
            "prove".into(),
            "p & q => q".into(),
            "--emit-proof".into(),
            p(&d("g.json")).into(),
        ],
        vec![
            "prove".into(),
            "p -> q, q -> r => p -> r".into(),
            "--emit-countermodel".into(),
            p(&d("cm.txt")).into(),
        ],
        vec![
            "gen-model".into(),
            "--seed".into(),
            "5".into(),
            "--formula".into(),
            "p -> q".into(),
        ],
    ];
    let commands: Vec<Vec<&str>> = vec![
        vec!["parse", "forall x.(A | B(x)) => A | forall x. B(x)"],
        vec!["prove", CD, "--calculus", "qgp"],
        vec!["prove", CD, "--calculus", "qgpm", "--budget-steps", "500"],
        vec![
            "prove",
            "forall x. exists y. R(x, y) => exists y. forall x. R(x, y)",
            "--budget-steps",
            "50",
        ],
        vec!["check-proof", p(&cd), "--calculus", "qgpm"],
        vec!["check-proof", p(&cd), "--calculus", "qgp"],
        vec!["cut-eliminate", p(&cd)],
        vec!["eval", "--model", p(&qb), "--sequent", CD],
        vec!["eval", "--model", p(&qb), "--sequent", CD, "--kripke"],
        vec!["check-model", p(&qb)],
        vec![
            "translate",
            "--from",
            "qgpm",
            "--to",
            "qgp",
            "--proof",
            p(&cd),
        ],
        vec!["translate", "--from", "qgp", "--to", "qp", "--proof", "G"],
        vec!["translate", "--from", "qgp", "--to", "qgpm", "--proof", "G"],
        vec![
            "dp-check",
            "--gamma",
            "GAMMA",
            "--alpha",
            "q",
            "--beta",
            "r",
            "--calculus",
            "qgpm",
        ],
        vec!["corpus", p(&unprovable), "--calculus", "qgpm"],
        vec![
            "gen-model",
            "--seed",
            "42",
            "--formula",
            "forall x. P(x) -> q(c1)",
            "--domain-size",
            "3",
        ],
        vec![
            "gen-model",
            "--seed",
            "42",
            "--formula",
            "forall x. P(x) | q",
            "--kripke",
            "--worlds",
            "4",
        ],
    ];
    let run = |args: &[&str]| {
        let out = primal(args);
        (out.status.code(), out.stdout, out.stderr)
    };
    let files = ["m.json", "g.json", "cm.txt"];
    let mut first_files = Vec::new();
    for pass in 0..2 {
        for c in &setup {
            let args: Vec<&str> = c.iter().map(String::as_str).collect();
            run(&args);
        }
        let contents: Vec<Vec<u8>> = files.iter().map(|n| std::fs::read(d(n)).unwrap()).collect();
        if pass == 0 {
            first_files = contents;
        } else {
            ensure(first_files == contents, || "emitted files differ".into())?;
        }
    }
    let g = d("g.json");
    let gamma = d("gamma.txt");
    for c in &commands {
        let args: Vec<&str> = c
            .iter()
            .map(|a| match *a {
                "G" => p(&g),
                "GAMMA" => p(&gamma),
                other => other,
            })
            .collect();
        let a = run(&args);
        let b = run(&args);
        ensure(a == b, || {
            format!("`{}` differs between runs", args.join(" "))
        })?;
    }
    let s = seq(CD);
    ensure(
        build_reduction_tree(&s, Budget::default()).unwrap()
            == build_reduction_tree(&s, Budget::default()).unwrap(),
        || "reduction tree differs".into(),
    )?;
    Ok(format!(
        "{} commands and {} emitted files identical",
        commands.len() + setup.len(),
        files.len()
    ))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("constant domain separates QGPM from QGP", c1_cd_separation),
        (
            "primal implication in all ten calculi",
            c2_primal_implication,
        ),
        ("deduction theorem fails", c3_deduction_failure),
        ("hand-encoded CD derivation checks", c4_hand_cd_derivation),
        ("QGPM <-> QGP+CD translations", c5_multi_single_round_trip),
        (
            "natural deduction <-> sequent translations",
            c6_nd_round_trip,
        ),
        ("cut elimination", c7_cut_elimination),
        ("soundness over generated models", c8_soundness),
        ("countermodels from the reduction tree", c9_countermodels),
        ("Kripke / quasi-boolean gap", c10_semantic_gap),
        (
            "propositional GP / GPM agreement",
            c11_propositional_agreement,
        ),
        ("disjunction property", c12_disjunction_property),
        ("determinism", c13_determinism),
    ];
    let worker = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || {
            let mut failed = 0;
            for (i, (name, run)) in criteria.iter().enumerate() {
                let start = Instant::now();
                let result =
                    catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
                let spent = start.elapsed();
                match result {
                    Ok(detail) => println!("PASS {:>2} {name}: {detail} [{spent:.2?}]", i + 1),
                    Err(why) => {
                        failed += 1;
                        println!("FAIL {:>2} {name}: {why} [{spent:.2?}]", i + 1);
                    }
                }
            }
            failed
        });
    let failed = worker.expect("spawn").join().expect("runner");
    println!("{} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
