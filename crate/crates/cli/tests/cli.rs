use std::path::{Path, PathBuf};

use assert_cmd::Command;
use serde_json::Value;
use tempfile::TempDir;

use gwa_core::formats::{to_canonical_json, TreeAutomatonDoc};
use gwa_core::repro::{parity, tree_signature};

fn gwa() -> Command {
    let mut c = Command::cargo_bin("gwa").unwrap();
    c.env_remove("GWA_SEED");
    c
}

fn stdout(c: &mut Command) -> String {
    String::from_utf8(c.output().unwrap().stdout).unwrap()
}

fn write_witness(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let p = dir.join(name);
    gwa().args(["witness"]).args(args).arg("-o").arg(&p).assert().success();
    p
}

#[test]
fn validate_accepts_witness_outputs() {
    let t = TempDir::new().unwrap();
    let files = [
        write_witness(t.path(), "sig.json", &["sig"]),
        write_witness(t.path(), "h.json", &["H"]),
        write_witness(t.path(), "hf.json", &["H", "--variant", "fake"]),
        write_witness(t.path(), "f.json", &["F", "--i", "1", "--d", "-b"]),
        write_witness(t.path(), "g.json", &["G-counter", "--i", "1", "--j", "2"]),
        write_witness(t.path(), "p.json", &["G-probe", "--i", "0", "--d", "+a", "--dprime", "-c"]),
        write_witness(t.path(), "hom.json", &["hom"]),
        write_witness(t.path(), "a.json", &["automaton", "--kind", "counter"]),
        write_witness(t.path(), "e.json", &["automaton", "--kind", "escape", "--n", "3"]),
    ];
    for f in &files {
        let out = stdout(gwa().arg("validate").arg(f));
        assert!(out.contains("no violations"), "{}: {out}", f.display());
    }
}

#[test]
fn tampered_graph_fails_validation() {
    let t = TempDir::new().unwrap();
    let g = write_witness(t.path(), "g.json", &["G-counter", "--i", "0", "--j", "0"]);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    doc["edges"].as_array_mut().unwrap().pop();
    let bad = t.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = gwa().arg("validate").arg(&bad).assert().code(1);
    let text = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    assert!(text.contains("violation: missing edge"), "{text}");

    let out = gwa().args(["--format", "machine", "validate"]).arg(&bad).assert().code(1);
    let v: Value = serde_json::from_slice(&out.get_output().stdout).unwrap();
    assert_eq!(v["status"], "failed");
    assert!(!v["results"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_exits_two_with_location() {
    let t = TempDir::new().unwrap();
    let p = t.path().join("broken.json");
    std::fs::write(&p, "{\n  \"nodes\": [\n    {\"id\": \n").unwrap();
    let out = gwa().arg("validate").arg(&p).assert().code(2);
    let err = String::from_utf8(out.get_output().stderr.clone()).unwrap();
    assert!(err.contains("line") && err.contains("column"), "{err}");

    gwa().arg("validate").arg(t.path().join("missing.json")).assert().code(2);
    gwa().arg("no-such-command").assert().code(2);
    gwa().args(["witness", "sweep", "--k", "8"]).assert().code(2);
}

#[test]
fn claim3_reproduces() {
    let out = stdout(gwa().args(["repro", "claim3", "--n", "4", "--k", "9"]));
    assert!(out.contains("0 counter mismatches"), "{out}");
    assert!(out.contains("0 probe mismatches"), "{out}");
    gwa().args(["repro", "claim3"]).assert().success();
}

#[test]
fn thm1_small_suite_reports_counts() {
    let out = gwa().args(["repro", "thm1", "--suite", "small", "--automata", "2"]).assert().success();
    let text = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    assert!(text.contains("0 mismatches"), "{text}");
    assert!(text.contains("n = 2, k = 4, several initial: 9 states"), "{text}");
    assert!(text.contains("0 disagreements"), "{text}");
}

#[test]
fn machine_output_is_deterministic() {
    let runs = [
        vec!["--format", "machine", "repro", "claim3"],
        vec!["--format", "machine", "repro", "thm1", "--suite", "random", "--automata", "2"],
        vec!["--format", "machine", "witness", "probe", "--n", "2", "--k", "5", "--states", "1"],
    ];
    for args in runs {
        let a = gwa().args(&args).output().unwrap();
        let b = gwa().args(&args).output().unwrap();
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let v: Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(v["status"], "ok");
    }
}

#[test]
fn seed_comes_from_environment() {
    let run = |seed: Option<&str>| {
        let mut c = gwa();
        if let Some(s) = seed {
            c.env("GWA_SEED", s);
        }
        let out = c.args(["--format", "machine", "repro", "thm1", "--suite", "random", "--automata", "1"]).output().unwrap();
        serde_json::from_slice::<Value>(&out.stdout).unwrap()
    };
    assert_eq!(run(Some("7"))["parameters"]["seed"], 7);
    assert_ne!(run(None)["parameters"]["seed"], 7);
}

#[test]
fn hom_apply_invert_and_verify() {
    let t = TempDir::new().unwrap();
    let h = write_witness(t.path(), "h.json", &["hom"]);
    let a = write_witness(t.path(), "a.json", &["automaton", "--kind", "counter"]);
    let same = write_witness(t.path(), "same.json", &["G-counter", "--i", "3", "--j", "3"]);
    let diff = write_witness(t.path(), "diff.json", &["G-probe", "--i", "1", "--d", "+a", "--dprime", "+b"]);

    let img = t.path().join("img.json");
    gwa().args(["hom", "apply"]).arg(&h).arg(&same).arg("-o").arg(&img).assert().success();
    let out = stdout(gwa().arg("run").arg("-a").arg(&a).arg("-g").arg(&img));
    assert!(out.starts_with("accept"), "{out}");

    let dot = stdout(gwa().args(["hom", "apply"]).arg(&h).arg(&diff).arg("--dot"));
    assert!(dot.starts_with("digraph") || dot.starts_with("graph"), "{dot}");

    let inv = t.path().join("inv.json");
    let out = stdout(gwa().args(["hom", "invert"]).arg(&h).arg(&a).arg("-o").arg(&inv));
    assert!(out.contains("36 states (4 x 9)"), "{out}");
    assert!(stdout(gwa().arg("run").arg("-a").arg(&inv).arg("-g").arg(&same)).starts_with("accept"));
    assert!(!stdout(gwa().arg("run").arg("-a").arg(&inv).arg("-g").arg(&diff)).starts_with("accept"));

    gwa().args(["hom", "verify"]).arg(&h).arg(&a).arg("--graphs").arg(&same).arg(&diff).assert().success();
    gwa().args(["agree", "--first"]).arg(&inv).arg("--second").arg(&inv).arg(&same).arg(&diff).assert().success();

    let tr = stdout(gwa().arg("trace").arg("-a").arg(&inv).arg("-g").arg(&same).args(["--max-len", "2"]));
    assert_eq!(tr.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 2, "{tr}");
}

#[test]
fn tree_characterize_and_verify() {
    let t = TempDir::new().unwrap();
    let a = t.path().join("parity.json");
    std::fs::write(&a, to_canonical_json(&TreeAutomatonDoc::from_automaton(&parity(tree_signature()), true))).unwrap();
    gwa().args(["tree", "validate"]).arg(&a).assert().success();
    let out_dir = t.path().join("out");
    gwa().args(["tree", "characterize", "-a"]).arg(&a).arg("-o").arg(&out_dir).assert().success();
    for f in ["s_reg.json", "s_mid.json", "s_comp.json", "g.json", "h.json"] {
        let p = out_dir.join(f);
        assert!(p.exists(), "{f}");
        gwa().arg("validate").arg(&p).assert().success();
    }
    let out = stdout(gwa().args(["tree", "verify", "--max-nodes", "5", "-a"]).arg(&a));
    assert!(out.contains("0 counterexamples"), "{out}");
    let out = stdout(gwa().args(["repro", "thm4", "--max-nodes", "5"]));
    assert_eq!(out.matches("0 counterexamples").count(), 2, "{out}");
}
