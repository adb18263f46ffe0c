use std::process::{Command, Output};

use gaugecalc_core::checkers::counterexample_verify;
use serde_json::Value;

const SQUARE_HALF: &str = r#"{"kind":"poly","coeffs":[0,0,0.5],"domain":[0,1]}"#;
const IDENTITY: &str = r#"{"kind":"poly","coeffs":[0,1],"domain":[0,1]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaugecalc")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaugecalc"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn build_lists_exact_levels() {
    let o = run(&["counterexample", "build", "--count", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,level_length,gap_length,plateau_length,scaled_level_length,measure");
    assert_eq!(lines[2], "1,5/12,1/24,1/48,5/6,5/6");
    assert_eq!(lines.len(), 7);
}

#[test]
fn build_stays_exact_at_depth() {
    let o = run(&["counterexample", "build", "--count", "41"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "40");
    // 2^40 r_40 = 44 / (2 * 42)
    assert_eq!(last[4], "11/21");
    assert_eq!(last[5], "11/21");
    assert_eq!(last[1], "11/23089744183296");
    let o = run(&["counterexample", "build", "--count", "12", "--depth-cap", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_matches_the_library() {
    let o = run(&["counterexample", "verify", "--count", "10", "--r", "1,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let expected = counterexample_verify(1..=10, &[1.0, 2.0], 1e-6, 60).unwrap();
    assert_eq!(stdout(&o), expected.to_csv());
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",pass,true")));
    assert_eq!(stdout(&o).lines().count(), 21);
}

#[test]
fn derivate_of_a_square() {
    let spec = r#"{"kind":"poly","coeffs":[0,0,1],"domain":[0,1]}"#;
    let o = run(&["derivate", "--spec", spec, "--points", "0.5", "--r", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o);
    let d = &rows[0]["derivative"];
    assert!((d["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(d["verdict"], "converges");
    assert_eq!(rows[0]["derivates"]["agree"], true);
}

#[test]
fn derivate_of_the_counterexample_diverges_at_zero() {
    let spec = r#"{"kind":"counterexample"}"#;
    let o = run(&["derivate", "--spec", spec, "--points", "0", "--r", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[4], "diverges");
    assert_eq!(row[6], "+inf");
    assert_eq!(row[7], "-inf");
}

#[test]
fn malformed_input_exits_two() {
    let o = run(&["derivate", "--spec", "{not json", "--points", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spec error"));
    assert_eq!(run(&["derivate", "--spec", IDENTITY, "--points", "2"]).status.code(), Some(2));
    assert_eq!(run(&["derivate", "--bogus"]).status.code(), Some(2));
    assert_eq!(run_env(&["counterexample", "build"], "GAUGECALC_THREADS", "zero").status.code(), Some(2));
}

#[test]
fn cousin_with_a_large_gauge_is_one_item() {
    let o = run(&["partition", "cousin", "--gauge", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"[{"lo":0.0,"hi":1.0,"tag":0.5}]"#);
}

#[test]
fn cousin_output_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let path = path.to_str().unwrap();
    let o = run(&["partition", "cousin", "--gauge", "0.3", "--out", path]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let o = run(&["partition", "check", path, "--gauge", "0.3", "--spec", SQUARE_HALF, "--spec", IDENTITY]);
    assert_eq!(o.status.code(), Some(0));
    let s = json(&o);
    assert_eq!(s["nonoverlap"], true);
    assert_eq!(s["fine"], true);
    assert_eq!(s["tiles"], true);
    assert!(s["riemann_sum"].as_f64().unwrap() < 0.1);
}

#[test]
fn overlapping_partition_fails_check() {
    let p = r#"[{"lo":0,"hi":0.6,"tag":0.1},{"lo":0.5,"hi":1,"tag":0.9}]"#;
    let o = run(&["partition", "check", p, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("nonoverlap,false"));
}

#[test]
fn checkers_report_verdicts_through_exit_codes() {
    let o = run(&["hkr-check", "--spec", SQUARE_HALF, "--spec", IDENTITY, "--gauge", "0.001"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "certificate");

    let o = run(&["hkr-check", "--spec", SQUARE_HALF, "--spec", SQUARE_HALF, "--gauge", "0.01", "--epsilon", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "witnessViolation");

    let c = r#"{"kind":"counterexample"}"#;
    let o = run(&["ac-check", "--spec", c, "--points", "level:8", "--epsilon", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["numericSummary"]["maxFoundSum"], 0.0);

    let o = run(&["acr-check", "--spec", IDENTITY, "--points", "grid:50", "--epsilon", "0.1", "--eta", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn runs_are_deterministic() {
    let c = r#"{"kind":"counterexample"}"#;
    let args = ["acr-check", "--spec", c, "--points", "level:6", "--gauge", "0.01", "--eta", "0.05", "--seed", "7"];
    let a = run(&args);
    let b = run_env(&args, "GAUGECALC_THREADS", "1");
    assert_eq!(a.stdout, b.stdout);
    let hkr = ["hkr-check", "--spec", SQUARE_HALF, "--spec", IDENTITY, "--seed", "3", "--format", "csv"];
    assert_eq!(run(&hkr).stdout, run_env(&hkr, "GAUGECALC_THREADS", "2").stdout);
}
