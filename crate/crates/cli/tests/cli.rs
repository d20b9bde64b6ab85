use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new() -> Run {
        Run {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn exec(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_explaineo"))
            .args(args)
            .env("EXPLAINEO_WORKSPACE", self.dir.path())
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.exec(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    let run = Run::new();
    let intact = fixture("tax_interest.dm");
    let out = run.ok(&["check", path(&intact), "--service", "TaxInterest"]);
    assert!(out.ends_with("5 of 5 checks passed\n"), "{out}");

    let crippled = fixture("tax_interest_crippled.dm");
    let out = run.exec(&["check", path(&crippled), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let io = reports
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["check"] == "io_paths")
        .unwrap();
    assert_eq!(io["verdict"], "fail");

    let out = run.exec(&["check", path(&intact), "--service", "Nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown service `Nope`"));
}

#[test]
fn invalid_model_reports_positions() {
    let run = Run::new();
    let bad = run.dir.path().join("bad.dm");
    std::fs::write(&bad, "model bad\nobject A {\n  x: colour\n}\n").unwrap();
    let out = run.exec(&["check", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("does not validate") && err.contains("3:"),
        "{err}"
    );
}

#[test]
fn eval_store_and_ask() {
    let run = Run::new();
    assert_eq!(
        run.ok(&["put", path(&fixture("tax_interest.dm"))]),
        "stored model tax_interest revision 1\n"
    );
    let late = fixture("late.json");
    run.ok(&[
        "eval",
        "tax_interest",
        "--inputs",
        path(&late),
        "--save",
        "--id",
        "late",
    ]);
    let out = run.ok(&[
        "ask",
        "why",
        "--model",
        "tax_interest",
        "--instance",
        "late",
        "--target",
        "owes_tax_interest",
    ]);
    assert!(out.starts_with("owes_tax_interest = true by rule paid_too_late"));
    assert!(out.contains("https://wetten.overheid.nl/"));

    // A file instance from `eval -o` answers the same way.
    let doc = run.dir.path().join("late-instance.json");
    run.ok(&[
        "eval",
        path(&fixture("tax_interest.dm")),
        "--inputs",
        path(&late),
        "-o",
        path(&doc),
    ]);
    let from_file = run.ok(&[
        "ask",
        "why",
        "--model",
        path(&fixture("tax_interest.dm")),
        "--instance",
        path(&doc),
        "--target",
        "owes_tax_interest",
    ]);
    assert_eq!(from_file, out);

    let table = run.ok(&[
        "ask",
        "what-if",
        "--model",
        "tax_interest",
        "--instance",
        "late",
        "--param",
        r#"overrides={"payment_date": "2023-03-15"}"#,
        "--format",
        "table",
    ]);
    assert!(table.starts_with("Comparison\n"), "{table}");
    let csv = run.ok(&[
        "ask",
        "what",
        "--model",
        "tax_interest",
        "--instance",
        "late",
        "--format",
        "csv",
    ]);
    assert!(
        csv.starts_with("Decisions\nmessage,variable,value,status\n"),
        "{csv}"
    );
}

#[test]
fn visualisation_and_export() {
    let run = Run::new();
    let model = fixture("tax_interest.dm");
    let dot = run.ok(&[
        "ask",
        "visualisation",
        "--model",
        path(&model),
        "--param",
        "view=object",
        "--format",
        "dot",
    ]);
    assert!(dot.starts_with("digraph explanation {"));
    assert!(dot.contains("shape=tab") && !dot.contains("shape=box"));

    let cypher = run.ok(&["export", path(&model), "--to", "cypher"]);
    let golden = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/tax_interest.cypher"),
    )
    .unwrap();
    assert_eq!(cypher, golden);
    let asg = run.ok(&["export", path(&model), "--to", "json", "--asg"]);
    assert!(asg.contains("\"Atom\""));
}

#[test]
fn usage_errors() {
    let run = Run::new();
    let model = fixture("tax_interest.dm");
    for args in [
        vec!["ask", "wherefore", "--model", path(&model)],
        vec![
            "ask",
            "why",
            "--model",
            path(&model),
            "--target",
            "owes_tax_interest",
        ],
        vec!["ask", "input", "--model", "nope"],
        vec![
            "ask",
            "input",
            "--model",
            path(&model),
            "--param",
            "novalue",
        ],
        vec![
            "ask",
            "whether",
            "--model",
            path(&model),
            "--profile",
            "legal_support",
            "--param",
            "check=logical",
        ],
    ] {
        let out = run.exec(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
}
