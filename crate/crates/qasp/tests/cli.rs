//! Integration tests for the command line driver: exit codes, output
//! shapes, split inputs, and the JSON report.

use std::path::Path;
use std::process::{Command, Output};

const GOLDEN: &str = "\
%@exists
a(1) | a(2).
%@forall
b(1) | b(2) :- a(1).
b(2) :- a(2).
%@constraint
:- b(1), not b(2).
";

fn qasp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qasp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn qasp")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_coherent_program_exits_10() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.qasp", GOLDEN);
    let out = qasp(&["solve", &f, "--models"], dir.path());
    assert_eq!(out.status.code(), Some(10), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, "COHERENT\n{a(2)}\n");
}

#[test]
fn solve_incoherent_program_exits_20() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.qasp", "%@exists\na.\n%@constraint\n:- a.\n");
    let out = qasp(&["solve", &f], dir.path());
    assert_eq!(out.status.code(), Some(20), "{out:?}");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "INCOHERENT\n");
}

#[test]
fn solve_model_limit_caps_the_stream() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "two.qasp",
        "%@exists\na :- not b.\nb :- not a.\n%@constraint\n",
    );
    let out = qasp(&["solve", &f, "--models=1"], dir.path());
    assert_eq!(out.status.code(), Some(10));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2, "verdict plus exactly one model: {stdout}");
}

#[test]
fn extra_files_contribute_facts_to_the_first_block() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(
        dir.path(),
        "p.qasp",
        "%@exists\np :- q.\n%@constraint\n:- not p.\n",
    );
    let facts = write(dir.path(), "inst.lp", "q.\n");
    assert_eq!(qasp(&["solve", &prog], dir.path()).status.code(), Some(20));
    assert_eq!(qasp(&["solve", &prog, &facts], dir.path()).status.code(), Some(10));
}

#[test]
fn models_on_universal_program_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "u.qasp", "%@forall\na | b.\n%@constraint\n");
    let out = qasp(&["solve", &f, "--models"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("quantified answer sets defined only for existential programs"),
        "{stderr}"
    );
}

#[test]
fn missing_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = qasp(&["solve", "no-such-file.qasp"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_report_matches_text_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.qasp", GOLDEN);
    let out = qasp(&["solve", &f, "--models", "--json", "--trace"], dir.path());
    assert_eq!(out.status.code(), Some(10));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["coherent"], serde_json::json!(true));
    assert_eq!(v["models"], serde_json::json!([["a(2)"]]));
    assert!(v["stats"]["levels"].as_array().unwrap().len() >= 1);
    assert!(v["stats"]["time_ms"].is_u64());
    assert!(v["trace"].as_array().unwrap().len() >= 1);

    // Without --trace the key is absent entirely.
    let out = qasp(&["solve", &f, "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("trace").is_none());
}

#[test]
fn ground_is_identity_on_ground_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.qasp", GOLDEN);
    let out = qasp(&["ground", &f], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), GOLDEN);
}

#[test]
fn from_qbf_check_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.qdimacs", "p cnf 2 2\na 1 0\ne 2 0\n-1 2 0\n1 -2 0\n");
    let out = qasp(&["from-qbf", &f, "--check"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("x1 :- not nx1."), "{stdout}");
    assert!(String::from_utf8(out.stderr).unwrap().contains("check passed"));
}

#[test]
fn gen_writes_instance_and_expected_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("inst.qasp");
    let out = qasp(
        &["gen", "vc-dimension", "--seed", "3", "--out", target.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("%@exists"), "{text}");
    let sidecar = std::fs::read_to_string(dir.path().join("inst.qasp.expected")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert!(v["coherent"].is_boolean());
}

#[test]
fn gen_unknown_problem_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = qasp(&["gen", "no-such-problem"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("available"));
}

#[test]
fn selftest_small_count_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qasp(&["selftest", "--seed", "5", "--count", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("engine vs brute force: 5/5"), "{stdout}");
}
