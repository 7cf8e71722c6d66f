//! End-to-end tests of the binary: exit codes, artifacts, reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_comovement"))
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("COMOVEMENT_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn builtin_fixture_decomposition_is_golden() {
    let output = run(&["decompose", "--from-table1"]);
    assert!(output.status.success());
    let expected = "\
n,B,W,T,S,alpha,beta,X,Y
1,1,-1,0,1,4,1,-1,1
2,0,0,0,2,9,2,0,0
3,-1,1,0,3,10,3,1,-1
4,-2,0,1,3,,5,,0
5,-1,-1,1,4,,6,,1
6,0,-2,1,5,,7,,0
7,-1,-1,1,6,,8,,1
8,0,-2,1,7,,,,
9,1,-1,2,7,,,,
10,2,0,3,7,,,,
";
    assert_eq!(stdout(&output), expected);
}

#[test]
fn simulate_is_byte_reproducible_and_seed_sensitive() {
    let args = [
        "simulate", "--model", "qhistory", "--N", "32", "--seed", "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "simulate", "--model", "qhistory", "--N", "32", "--seed", "8",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_json_feeds_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let path_file = dir.path().join("path.json");
    let out = run(&[
        "simulate",
        "--model",
        "constant:1/3",
        "--N",
        "16",
        "--seed",
        "5",
        "--format",
        "json",
        "--out",
        path_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&["decompose", "--input", path_file.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,B,W,T,S,alpha,beta,X,Y\n"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn oracle_check_passes_and_negative_control_counts_as_pass() {
    let out = run(&[
        "oracle-check",
        "--model",
        "constant:1/4",
        "--N",
        "6",
        "--all",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));

    // The sign-peeking model fails factorization by design; that is the
    // expected outcome, so the exit code stays 0 and the report says so.
    let out = run(&[
        "oracle-check",
        "--model",
        "adversarial",
        "--N",
        "6",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let negative_controls: Vec<_> = reports
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["expected_pass"] == false)
        .collect();
    assert!(!negative_controls.is_empty());
    for r in negative_controls {
        assert_eq!(r["ok"], true);
        assert_eq!(r["pass"], false);
        assert!(r["witness"]["detail"].is_string());
    }
}

#[test]
fn oracle_check_emits_rational_pairs_in_json() {
    let out = run(&[
        "oracle-check",
        "--model",
        "constant:1/2",
        "--N",
        "4",
        "--check",
        "sign-symmetry",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(reports[0]["lhs"]["num"], 1);
    assert_eq!(reports[0]["lhs"]["den"], 2);
}

#[test]
fn unexpected_check_failure_exits_one() {
    // A significance of 1 - 1e-12 makes any finite p-value a failure.
    let out = run(&[
        "mc-test",
        "--seed",
        "3",
        "--alpha",
        "0.9999999",
        "block-pmf",
        "--model",
        "constant:1/4",
        "--k",
        "1",
        "--l",
        "1",
        "--N",
        "8",
        "--reps",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["simulate", "--model", "constant:1/4", "--N", "4"]);
    assert_eq!(out.status.code(), Some(2), "missing seed");
    let out = run(&[
        "simulate",
        "--model",
        "constant:9/10",
        "--N",
        "4",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2), "invalid theta");
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["oracle-check", "--model", "gaussian:0.5", "--N", "4"]);
    assert_eq!(out.status.code(), Some(2), "oracle needs exact models");
}

#[test]
fn model_json_file_round_trips_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let model_file = dir.path().join("model.json");
    std::fs::write(
        &model_file,
        r#"{"kind":"biased","theta":{"num":1,"den":2},"p":{"num":7,"den":10}}"#,
    )
    .unwrap();
    let arg = format!("@{}", model_file.display());
    let out = run(&["oracle-check", "--model", &arg, "--N", "5", "--all"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("biased-formula"));
}

#[test]
fn mc_delta_t_report_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let report_file = dir.path().join("report.json");
    let out = run(&[
        "mc-test",
        "--seed",
        "7",
        "--format",
        "json",
        "--out",
        report_file.to_str().unwrap(),
        "delta-t",
        "--rho",
        "0.5",
        "--reps",
        "100000",
        "--emit",
        "plotdata",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_file).unwrap()).unwrap();
    assert_eq!(report[0]["ok"], true);
    let plot = std::fs::read_to_string(dir.path().join("report.plotdata.csv")).unwrap();
    assert!(plot.starts_with("rho,estimate,target,stderr\n"));

    let rerun = run(&[
        "mc-test", "--seed", "7", "--format", "json", "delta-t", "--rho", "0.5", "--reps", "100000",
    ]);
    assert_eq!(
        serde_json::from_slice::<serde_json::Value>(&rerun.stdout).unwrap(),
        serde_json::Value::Array(report.as_array().unwrap().clone()),
        "same seed, same report"
    );
}

#[test]
fn analyze_two_files_inner_join() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "t,price\n1,100\n2,101\n3,99\n4,102\n").unwrap();
    std::fs::write(&b, "t,price\n2,50\n3,51\n4,49\n5,50\n").unwrap();
    let out = run(&[
        "analyze",
        "--input",
        a.to_str().unwrap(),
        "--input2",
        b.to_str().unwrap(),
        "--window",
        "2",
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // Join keeps timestamps 2, 3, 4: two steps.
    assert_eq!(report["steps"], 2);
}

#[test]
fn config_env_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"seed": 11, "reps": 20000}"#).unwrap();
    let out = bin()
        .args(["mc-test", "delta-t", "--rho", "0.0"])
        .env("COMOVEMENT_CONFIG", &config)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Flags still win over the config file.
    let out = bin()
        .args([
            "mc-test", "--seed", "12", "delta-t", "--rho", "0.0", "--reps", "20000",
        ])
        .env("COMOVEMENT_CONFIG", &config)
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn threads_flag_does_not_change_results() {
    let base = [
        "mc-test",
        "--seed",
        "5",
        "--format",
        "json",
        "block-pmf",
        "--model",
        "qhistory",
        "--k",
        "2",
        "--l",
        "1",
        "--N",
        "16",
        "--reps",
        "30000",
    ];
    let one = bin().args(base).arg("--threads").arg("1").output().unwrap();
    let two = bin().args(base).arg("--threads").arg("2").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn help_documents_the_flags() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for needle in [
        "--seed",
        "--format",
        "--out",
        "--threads",
        "--alpha",
        "COMOVEMENT_CONFIG",
    ] {
        assert!(text.contains(needle), "help is missing {needle}");
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_comovement")).exists());
}
