use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use primal_core::calculus::{
    check_derivation_with, derivation_from_json, derivation_to_json, eliminate_cut, CheckOptions,
    Derivation, DerivationDoc,
};
use primal_core::harness::{
    dp_split, gen_kripke_model, gen_qb_model, run_corpus, Choice, KripkeShape, Signature,
};
use primal_core::prover::{prove, Budget, Verdict};
use primal_core::semantics::{
    kripke_counter_assignment, parse_model, qb_counter_assignment, ModelFile,
};
use primal_core::syntax::{parse_formula, parse_formula_list, parse_sequent, CalculusId, Formula};
use primal_core::transform::{gentzen_to_nd, nd_to_gentzen, qgp_to_qgpm, qgpm_to_qgp_cd};

pub const OK: u8 = 0;
pub const FAIL: u8 = 1;
pub const UNKNOWN: u8 = 2;
pub const USAGE: u8 = 3;

pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn out(code: u8, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    pub fn error(msg: impl std::fmt::Display) -> Self {
        Outcome {
            code: USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }

    fn fail(msg: impl std::fmt::Display) -> Self {
        Outcome {
            code: FAIL,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "primal",
    version,
    about = "Proof search, checking and models for first-order primal logic"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula or sequent and print it in canonical form.
    Parse { text: String },
    /// Search for a cut-free derivation.
    Prove {
        sequent: String,
        #[arg(long, default_value = "qgp")]
        calculus: CalculusId,
        #[arg(long)]
        budget_steps: Option<usize>,
        /// Write the derivation (JSON) here.
        #[arg(long)]
        emit_proof: Option<PathBuf>,
        /// Write the countermodel (or budget-limited candidate) here.
        #[arg(long)]
        emit_countermodel: Option<PathBuf>,
    },
    /// Check a derivation file.
    CheckProof {
        file: PathBuf,
        #[arg(long)]
        calculus: CalculusId,
        #[arg(long)]
        allow_cut: bool,
        /// Accept constant-domain leaves (QGP and QGPW only).
        #[arg(long)]
        allow_cd: bool,
    },
    /// Remove cuts from a QGP derivation.
    CutEliminate {
        file: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide whether a model validates a sequent.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sequent: String,
        /// Evaluate as a Kripke model (a quasi-boolean file becomes one world).
        #[arg(long)]
        kripke: bool,
    },
    /// List the violated model conditions.
    CheckModel { file: PathBuf },
    /// Translate a derivation between calculi.
    Translate {
        #[arg(long)]
        from: CalculusId,
        #[arg(long)]
        to: CalculusId,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Disjunction property for a Harrop context.
    DpCheck {
        /// One formula per line; `#` starts a comment.
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value = "qgp")]
        calculus: CalculusId,
        #[arg(long)]
        budget_steps: Option<usize>,
    },
    /// Run an `EXPECT` corpus.
    Corpus {
        file: PathBuf,
        #[arg(long)]
        calculus: CalculusId,
        #[arg(long)]
        budget_steps: Option<usize>,
    },
    /// Generate a random model.
    GenModel {
        #[arg(long)]
        seed: u64,
        /// Formula the model must evaluate; repeatable.
        #[arg(long = "formula")]
        formulas: Vec<String>,
        #[arg(long, default_value_t = 2)]
        domain_size: usize,
        #[arg(long)]
        kripke: bool,
        #[arg(long, default_value_t = 3)]
        worlds: usize,
        /// Weak-disjunction valuation.
        #[arg(long)]
        wd: bool,
    },
}

pub fn run(args: &[String]) -> Outcome {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let text = e.render().to_string();
            return if code == OK {
                Outcome::out(OK, text)
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match cli.cmd {
        Cmd::Parse { text } => parse(&text),
        Cmd::Prove {
            sequent,
            calculus,
            budget_steps,
            emit_proof,
            emit_countermodel,
        } => cmd_prove(
            &sequent,
            calculus,
            budget(budget_steps),
            emit_proof,
            emit_countermodel,
        ),
        Cmd::CheckProof {
            file,
            calculus,
            allow_cut,
            allow_cd,
        } => check_proof(&file, calculus, allow_cut, allow_cd),
        Cmd::CutEliminate { file, output } => cut_eliminate(&file, output),
        Cmd::Eval {
            model,
            sequent,
            kripke,
        } => eval(&model, &sequent, kripke),
        Cmd::CheckModel { file } => check_model(&file),
        Cmd::Translate {
            from,
            to,
            proof,
            output,
        } => translate(from, to, &proof, output),
        Cmd::DpCheck {
            gamma,
            alpha,
            beta,
            calculus,
            budget_steps,
        } => dp_check(&gamma, &alpha, &beta, calculus, budget(budget_steps)),
        Cmd::Corpus {
            file,
            calculus,
            budget_steps,
        } => corpus(&file, calculus, budget(budget_steps)),
        Cmd::GenModel {
            seed,
            formulas,
            domain_size,
            kripke,
            worlds,
            wd,
        } => gen_model(seed, &formulas, domain_size, kripke, worlds, wd),
    }
}

fn budget(steps: Option<usize>) -> Budget {
    steps.map_or_else(Budget::default, Budget::with_steps)
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome::error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Outcome> {
    std::fs::write(path, text).map_err(|e| Outcome::error(format!("{}: {e}", path.display())))
}

fn read_proof(path: &Path) -> Result<Derivation, Outcome> {
    derivation_from_json(&read(path)?)
        .map_err(|e| Outcome::error(format!("{}: {e}", path.display())))
}

/// Writes `text` to `path`, or returns it for stdout.
fn emit(path: Option<PathBuf>, text: String) -> Result<String, Outcome> {
    match path {
        Some(p) => write(&p, &text).map(|()| String::new()),
        None => Ok(text),
    }
}

fn parse(text: &str) -> Outcome {
    if text.contains("=>") {
        match parse_sequent(text) {
            Ok(s) => Outcome::out(OK, format!("{s}\n")),
            Err(e) => Outcome::error(e),
        }
    } else {
        match parse_formula(text) {
            Ok(f) => Outcome::out(OK, format!("{f}\n")),
            Err(e) => Outcome::error(e),
        }
    }
}

fn cmd_prove(
    text: &str,
    calculus: CalculusId,
    budget: Budget,
    emit_proof: Option<PathBuf>,
    emit_model: Option<PathBuf>,
) -> Outcome {
    let s = match parse_sequent(text) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    let verdict = match prove(&s, calculus, budget) {
        Ok(v) => v,
        Err(e) => return Outcome::error(e),
    };
    let mut out = format!("{}\n", verdict.label());
    let code = match &verdict {
        Verdict::Proved(d) => {
            let _ = writeln!(out, "height {} size {}", d.height(), d.size());
            if let Some(p) = emit_proof {
                if let Err(o) = write(&p, &derivation_to_json(d)) {
                    return o;
                }
            }
            OK
        }
        Verdict::Refuted { model, .. } => {
            if let Some(m) = model {
                let _ = write!(out, "countermodel:\n{m}");
                if let Some(p) = emit_model {
                    if let Err(o) = write(&p, &m.to_string()) {
                        return o;
                    }
                }
            }
            FAIL
        }
        Verdict::Unknown { spent, candidate } => {
            let _ = writeln!(
                out,
                "steps {} nodes {} fresh {}",
                spent.steps, spent.nodes, spent.fresh_vars
            );
            if let (Some(m), Some(p)) = (candidate, emit_model) {
                if let Err(o) = write(&p, &m.to_string()) {
                    return o;
                }
            }
            UNKNOWN
        }
    };
    Outcome::out(code, out)
}

fn check_proof(file: &Path, calculus: CalculusId, allow_cut: bool, allow_cd: bool) -> Outcome {
    let d = match read_proof(file) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let opts = CheckOptions {
        calculus,
        allow_cut,
        allow_cd,
    };
    match check_derivation_with(&d, opts) {
        Ok(()) => Outcome::out(OK, format!("valid {calculus}: {}\n", d.conclusion)),
        Err(f) => Outcome::out(FAIL, format!("invalid {calculus}: {f}\n")),
    }
}

fn cut_eliminate(file: &Path, output: Option<PathBuf>) -> Outcome {
    let d = match read_proof(file) {
        Ok(d) => d,
        Err(o) => return o,
    };
    match eliminate_cut(&d) {
        Ok(e) => match emit(output, derivation_to_json(&e)) {
            Ok(text) => Outcome::out(OK, text),
            Err(o) => o,
        },
        Err(e) => Outcome::fail(e),
    }
}

fn load_model(path: &Path) -> Result<ModelFile, Outcome> {
    parse_model(&read(path)?).map_err(|e| Outcome::error(format!("{}: {e}", path.display())))
}

fn eval(model: &Path, text: &str, kripke: bool) -> Outcome {
    let m = match load_model(model) {
        Ok(m) => m,
        Err(o) => return o,
    };
    let s = match parse_sequent(text) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    let counter = match m {
        ModelFile::QuasiBoolean(q) if !kripke => {
            qb_counter_assignment(&q, &s).map(|c| c.map(|a| (None, a)))
        }
        other => kripke_counter_assignment(&other.into_kripke(), &s)
            .map(|c| c.map(|(w, a)| (Some(w), a))),
    };
    match counter {
        Ok(None) => Outcome::out(OK, "valid\n".into()),
        Ok(Some((world, assignment))) => {
            let mut out = String::from("invalid\n");
            if let Some(w) = world {
                let _ = writeln!(out, "world: {w}");
            }
            for (x, e) in &assignment {
                let _ = writeln!(out, "{x} = {e}");
            }
            Outcome::out(FAIL, out)
        }
        Err(e) => Outcome::error(e),
    }
}

fn check_model(file: &Path) -> Outcome {
    let m = match load_model(file) {
        Ok(m) => m,
        Err(o) => return o,
    };
    let violations = match &m {
        ModelFile::QuasiBoolean(q) => primal_core::semantics::check_qb_valuation(q),
        ModelFile::Kripke(k) => primal_core::semantics::check_kripke_model(k),
    };
    if violations.is_empty() {
        return Outcome::out(OK, "ok\n".into());
    }
    let mut out = String::new();
    for v in &violations {
        let _ = writeln!(out, "{v}");
    }
    Outcome::out(FAIL, out)
}

fn translate(from: CalculusId, to: CalculusId, proof: &Path, output: Option<PathBuf>) -> Outcome {
    use CalculusId::*;
    let d = match read_proof(proof) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let text = match (from, to) {
        (QGP | QGPW | GP | GPW, QGPM | QGPMW | GPM | GPMW) => {
            qgp_to_qgpm(&d).map(|e| derivation_to_json(&e))
        }
        (QGPM | GPM, QGP | GP) => qgpm_to_qgp_cd(&d).map(|r| {
            let report = serde_json::json!({
                "source": from.name(),
                "target": "QGP+CD",
                "endsequent": r.target.conclusion.to_string(),
                "cd_instances": r.cd_instances.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "cuts_introduced": r.cuts_introduced,
                "derivation": DerivationDoc::from(&r.target),
            });
            let mut s = serde_json::to_string_pretty(&report).expect("json value");
            s.push('\n');
            s
        }),
        (QP | QPW, QGP | QGPW | GP | GPW) => nd_to_gentzen(&d).map(|e| derivation_to_json(&e)),
        (QGP | QGPW | GP | GPW, QP | QPW) => gentzen_to_nd(&d).map(|e| derivation_to_json(&e)),
        _ => return Outcome::error(format!("no translation from {from} to {to}")),
    };
    match text {
        Ok(t) => match emit(output, t) {
            Ok(s) => Outcome::out(OK, s),
            Err(o) => o,
        },
        Err(e) => Outcome::fail(e),
    }
}

fn dp_check(
    gamma: &Path,
    alpha: &str,
    beta: &str,
    calculus: CalculusId,
    budget: Budget,
) -> Outcome {
    let text = match read(gamma) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let mut g = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match parse_formula(line) {
            Ok(f) => {
                g.insert(f);
            }
            Err(e) => return Outcome::error(format!("{}:{}: {e}", gamma.display(), i + 1)),
        }
    }
    let (a, b) = match (parse_formula(alpha), parse_formula(beta)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
    };
    let r = match dp_split(&g, &a, &b, calculus, budget) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let mut out = String::new();
    let _ = writeln!(out, "chosen: {}", r.chosen.label());
    let _ = writeln!(out, "disjunction: {}", r.disjunction.label());
    let _ = writeln!(out, "left: {}", r.left.label());
    let _ = writeln!(out, "right: {}", r.right.label());
    if let Some(m) = &r.model {
        let _ = writeln!(out, "partial: {}", m.is_partial());
        let _ = write!(out, "model:\n{}", m.model);
    }
    let code = match r.chosen {
        Choice::NonHarrop => USAGE,
        _ if r.budget_exhausted() => UNKNOWN,
        Choice::Neither if r.disjunction.is_proved() => FAIL,
        _ => OK,
    };
    Outcome::out(code, out)
}

fn corpus(file: &Path, calculus: CalculusId, budget: Budget) -> Outcome {
    let text = match read(file) {
        Ok(t) => t,
        Err(o) => return o,
    };
    match run_corpus(&text, calculus, budget) {
        Ok(s) => Outcome::out(if s.all_passed() { OK } else { FAIL }, s.to_string()),
        Err(e) => Outcome::error(format!("{}: {e}", file.display())),
    }
}

fn gen_model(
    seed: u64,
    formulas: &[String],
    domain_size: usize,
    kripke: bool,
    worlds: usize,
    wd: bool,
) -> Outcome {
    let mut fs: Vec<Formula> = Vec::new();
    for f in formulas {
        match parse_formula_list(f) {
            Ok(list) => fs.extend(list),
            Err(e) => return Outcome::error(e),
        }
    }
    let mut sig = Signature::new(fs);
    sig.weak_disjunction = wd;
    let text = if kripke {
        let shape = KripkeShape {
            worlds,
            base_domain: domain_size.max(1),
            ..KripkeShape::default()
        };
        gen_kripke_model(seed, &sig, shape).to_string()
    } else {
        gen_qb_model(seed, &sig, domain_size).to_string()
    };
    Outcome::out(OK, text)
}
