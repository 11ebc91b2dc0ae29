use std::path::Path;
use std::process::{Command, Output};

fn primal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primal"))
        .args(args)
        .output()
        .expect("run primal")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CD: &str = "forall x.(A | B(x)) => A | forall x. B(x)";

#[test]
fn parse_prints_canonical_form() {
    let o = primal(&["parse", "forall x.(P(x)->q)"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "forall x. P(x) -> q\n");
    let o = primal(&["parse", "p & => q"]);
    assert_eq!(code(&o), 3);
    assert!(!o.stderr.is_empty());
}

#[test]
fn prove_exit_codes() {
    let o = primal(&["prove", "p, p -> q => q"]);
    assert_eq!(
        (code(&o), stdout(&o).lines().next().unwrap()),
        (0, "proved")
    );
    let o = primal(&["prove", "=> p -> p"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("refuted"));
    let o = primal(&["prove", "p", "--calculus", "nope"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn constant_domain_separates_calculi() {
    assert_eq!(code(&primal(&["prove", CD, "--calculus", "qgp"])), 1);
    assert_eq!(code(&primal(&["prove", CD, "--calculus", "qgpm"])), 0);
}

#[test]
fn emitted_proofs_check_and_translate() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("cd.json");
    assert_eq!(
        code(&primal(&[
            "prove",
            CD,
            "--calculus",
            "qgpm",
            "--emit-proof",
            path(&proof)
        ])),
        0
    );
    assert_eq!(
        code(&primal(&[
            "check-proof",
            path(&proof),
            "--calculus",
            "qgpm"
        ])),
        0
    );
    assert_eq!(
        code(&primal(&["check-proof", path(&proof), "--calculus", "qgp"])),
        1
    );

    let o = primal(&[
        "translate",
        "--from",
        "qgpm",
        "--to",
        "qgp",
        "--proof",
        path(&proof),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["cd_instances"].as_array().unwrap().len(), 1);
    let target = dir.path().join("qgp.json");
    std::fs::write(&target, report["derivation"].to_string()).unwrap();
    assert_eq!(
        code(&primal(&[
            "check-proof",
            path(&target),
            "--calculus",
            "qgp",
            "--allow-cut"
        ])),
        1
    );
    let o = primal(&[
        "check-proof",
        path(&target),
        "--calculus",
        "qgp",
        "--allow-cut",
        "--allow-cd",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn nd_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let nd = dir.path().join("nd.json");
    let back = dir.path().join("back.json");
    assert_eq!(
        code(&primal(&[
            "prove",
            "p & q, q -> r => r | s",
            "--emit-proof",
            path(&g)
        ])),
        0
    );
    let args = [
        "translate",
        "--from",
        "qgp",
        "--to",
        "qp",
        "--proof",
        path(&g),
        "--output",
        path(&nd),
    ];
    assert_eq!(code(&primal(&args)), 0);
    assert_eq!(
        code(&primal(&["check-proof", path(&nd), "--calculus", "qp"])),
        0
    );
    let args = [
        "translate",
        "--from",
        "qp",
        "--to",
        "qgp",
        "--proof",
        path(&nd),
        "--output",
        path(&back),
    ];
    assert_eq!(code(&primal(&args)), 0);
    assert_eq!(
        code(&primal(&["check-proof", path(&back), "--calculus", "qgp"])),
        0
    );
    let o = primal(&[
        "translate",
        "--from",
        "qp",
        "--to",
        "qgpm",
        "--proof",
        path(&nd),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn countermodel_file_falsifies_the_sequent() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.txt");
    let s = "p -> q, q -> r => p -> r";
    assert_eq!(
        code(&primal(&["prove", s, "--emit-countermodel", path(&m)])),
        1
    );
    assert_eq!(code(&primal(&["check-model", path(&m)])), 0);
    assert_eq!(
        code(&primal(&["eval", "--model", path(&m), "--sequent", s])),
        1
    );
    assert_eq!(
        code(&primal(&[
            "eval",
            "--model",
            path(&m),
            "--sequent",
            s,
            "--kripke"
        ])),
        1
    );
}

#[test]
fn check_model_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.txt");
    std::fs::write(&m, "domain: e0\nval: p=1\nval: q=0\nval: (p -> q)=1\n").unwrap();
    let o = primal(&["check-model", path(&m)]);
    assert_eq!(code(&o), 1);
    assert!(!stdout(&o).is_empty());
    std::fs::write(&m, "domain e0\n").unwrap();
    assert_eq!(code(&primal(&["check-model", path(&m)])), 3);
}

#[test]
fn cut_eliminate_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.json");
    std::fs::write(&f, "{\"rule\": 7}").unwrap();
    assert_eq!(code(&primal(&["cut-eliminate", path(&f)])), 3);
    let g = dir.path().join("g.json");
    assert_eq!(
        code(&primal(&["prove", "p => p | q", "--emit-proof", path(&g)])),
        0
    );
    let o = primal(&["cut-eliminate", path(&g)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"conclusion\""));
}

#[test]
fn dp_check_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("gamma.txt");
    std::fs::write(&g, "# context\np -> q\np\n").unwrap();
    let o = primal(&[
        "dp-check",
        "--gamma",
        path(&g),
        "--alpha",
        "q",
        "--beta",
        "r",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("chosen: left\n"));
    std::fs::write(&g, "p | q\n").unwrap();
    let o = primal(&[
        "dp-check",
        "--gamma",
        path(&g),
        "--alpha",
        "p",
        "--beta",
        "q",
        "--calculus",
        "qgpm",
    ]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("chosen: non-harrop\n"));
}

#[test]
fn corpus_summary() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    std::fs::write(
        &c,
        format!("EXPECT proved p => p\n# comment\nEXPECT refuted {CD}\n"),
    )
    .unwrap();
    let o = primal(&["corpus", path(&c), "--calculus", "qgp"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("2 passed, 0 failed\n"));
    let o = primal(&["corpus", path(&c), "--calculus", "qgpm"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("MISMATCH"));
    std::fs::write(&c, "EXPECT perhaps p => p\n").unwrap();
    assert_eq!(code(&primal(&["corpus", path(&c), "--calculus", "qgp"])), 3);
}

#[test]
fn gen_model_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    for kripke in [false, true] {
        let mut args = vec![
            "gen-model",
            "--seed",
            "11",
            "--formula",
            "forall x. P(x) -> q(c)",
        ];
        if kripke {
            args.push("--kripke");
        }
        let a = primal(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(stdout(&a), stdout(&primal(&args)));
        let m = dir.path().join("m.txt");
        std::fs::write(&m, stdout(&a)).unwrap();
        assert_eq!(code(&primal(&["check-model", path(&m)])), 0);
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&primal(&["--help"])), 0);
    assert_eq!(code(&primal(&["--version"])), 0);
    assert_eq!(code(&primal(&[])), 3);
}
