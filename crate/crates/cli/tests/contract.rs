use std::io::Write;
use std::process::Command;

use fmarkov::scalar::rat;
use fmarkov_cli::{emit_report, load_matrix, run, run_to_string, Format, Report, Status};

fn args(a: &[&str]) -> Vec<String> {
    a.iter().map(|s| s.to_string()).collect()
}

fn matrix_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn uniform_matrix_gets_uniform_weights() {
    let f = matrix_file(r#"{"d":2,"rows":[["1/2","1/2"],["1/2","1/2"]]}"#);
    let (r, q) = load_matrix(f.path()).unwrap();
    assert_eq!(r.d(), 2);
    assert_eq!(q.as_slice(), &[rat(1, 2), rat(1, 2)]);
}

#[test]
fn bad_row_is_named() {
    let f = matrix_file(r#"{"d":2,"rows":[["1/2","1/2"],["2/3","1/2"]]}"#);
    let e = load_matrix(f.path()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("row 1"), "{e}");
}

#[test]
fn given_weights_are_checked_exactly() {
    let ok = matrix_file(r#"{"d":2,"rows":[["1/2","1/2"],["1/4","3/4"]],"q":["1/3","2/3"]}"#);
    let (_, q) = load_matrix(ok.path()).unwrap();
    assert_eq!(q.as_slice(), &[rat(1, 3), rat(2, 3)]);
    let bad = matrix_file(r#"{"d":2,"rows":[["1/2","1/2"],["1/4","3/4"]],"q":["1/2","1/2"]}"#);
    assert!(load_matrix(bad.path()).is_err());
}

#[test]
fn integers_are_accepted_as_entries() {
    let f = matrix_file(r#"{"d":2,"rows":[[0,1],["1",0]]}"#);
    let (_, q) = load_matrix(f.path()).unwrap();
    assert_eq!(q.as_slice(), &[rat(1, 2), rat(1, 2)]);
}

#[test]
fn reducible_chain_needs_explicit_weights() {
    let f = matrix_file(r#"{"d":2,"rows":[[1,0],[0,1]]}"#);
    assert!(load_matrix(f.path()).unwrap_err().to_string().contains("give q"));
}

#[test]
fn nf_example() {
    let (code, report) = run(&args(&["nf", "g0 g1"]));
    assert_eq!(code, 0);
    assert_eq!(report.status, Status::Pass);
    assert_eq!(report.result["normal_form"], "g2 g0");
}

#[test]
fn relations_example_passes() {
    let (code, report) = run(&args(&["relations", "--rep", "B", "--kmax", "4", "--window", "128"]));
    assert_eq!(code, 0);
    assert!(report.conditions.iter().all(|c| c.pass));
}

#[test]
fn missing_matrix_is_a_usage_error() {
    let (code, report) = run(&args(&["markov", "--matrix", "does/not/exist.json"]));
    assert_eq!(code, 2);
    assert_eq!(report.status, Status::Error);
    assert!(report.error.is_some());
}

#[test]
fn json_round_trips() {
    let (_, report) = run(&args(&[
        "relations",
        "--rep",
        "B",
        "--kmax",
        "1",
        "--window",
        "16",
        "--diagonal",
    ]));
    assert_eq!(report.status, Status::Fail);
    let text = emit_report(&report, Format::Json);
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.witnesses[0].value, "1,0");
}

#[test]
fn same_seed_same_bytes() {
    for cmd in [
        vec!["--seed", "11", "--no-timing", "intertwine", "--k", "0", "--n", "2"],
        vec!["--seed", "11", "--no-timing", "ergodic", "--k", "2", "--samples", "5"],
        vec!["--seed", "11", "--no-timing", "verify-all", "--quick"],
    ] {
        assert_eq!(run_to_string(&args(&cmd)), run_to_string(&args(&cmd)));
    }
}

#[test]
fn seeds_change_samples_not_verdicts() {
    for seed in ["0", "1", "2"] {
        let (code, _) = run(&args(&["--seed", seed, "bernoulli", "--samples", "5"]));
        assert_eq!(code, 0);
    }
}

#[test]
fn timing_is_reported_by_default() {
    let (_, report) = run(&args(&["nf", "g1"]));
    assert!(report.timing_ms.is_some());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fmarkov");
    let status = |a: &[&str]| Command::new(bin).args(a).output().unwrap();
    let out = status(&["nf", "g0 g1"]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["status"], "pass");
    assert_eq!(status(&["eq", "g0", "g1"]).status.code(), Some(1));
    assert_eq!(status(&["nf"]).status.code(), Some(2));
    assert_eq!(status(&["--limit", "2", "nf", "g0 g1 g2"]).status.code(), Some(3));
    assert_eq!(status(&["--help"]).status.code(), Some(0));
}
