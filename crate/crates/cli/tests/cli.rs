use std::path::Path;
use std::process::{Command, Output};

use qmetts_cli::output::sidecar_path;
use qmetts_cli::ResultFile;

fn qmetts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmetts")).args(args).env("SOURCE_DATE_EPOCH", "0").output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: [&str; 6] = ["--g2-stop", "0.2", "--k-steps", "4", "--dbeta", "0.25"];

#[test]
fn unknown_key_is_a_usage_error() {
    let out = qmetts(&["sweep", "--set", "bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    assert_eq!(qmetts(&["sweep", "--n-sites", "0"]).status.code(), Some(2));
    assert_eq!(qmetts(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_input_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = qmetts(&["compare", path_str(&missing), path_str(&missing)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let mut args = vec!["sweep", "--format", "csv+json", "-o", path_str(&csv)];
    args.extend(SMALL);
    let out = qmetts(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let file = ResultFile::read(&csv).unwrap();
    assert_eq!(file.meta("command"), Some("sweep"));
    assert_eq!(file.meta("timestamp"), Some("0"));
    let cfg = file.config().unwrap();
    assert_eq!(cfg.k_steps, 4);
    assert_eq!(cfg.g2_grid(), vec![0.0, 0.1, 0.2]);
    // 3 couplings, 4 steps, 2 observables.
    assert_eq!(file.rows.len(), 24);

    let json: ResultFile = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&csv)).unwrap()).unwrap();
    // The sidecar keeps full precision; the CSV keeps 12 significant digits.
    assert_eq!(json.metadata, file.metadata);
    assert_eq!(json.rows.len(), file.rows.len());
    for (j, c) in json.rows.iter().zip(&file.rows) {
        assert_eq!((&j.observable, j.k), (&c.observable, c.k));
        assert!((j.value - c.value).abs() <= 1e-11 * j.value.abs().max(1.0));
    }
}

#[test]
fn stdout_output_when_no_path_given() {
    let mut args = vec!["sweep", "--variant", "minkowski"];
    args.extend(SMALL);
    let out = qmetts(&args);
    assert!(out.status.success());
    let file = ResultFile::parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(file.rows.iter().all(|r| r.variant == "minkowski"));
}

#[test]
fn shot_runs_are_byte_identical_per_seed() {
    // One path for every run, since the output path is echoed into the metadata.
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.csv");
    let run = |seed: &str| {
        let mut args = vec!["sweep", "--measurement", "shots", "--shots", "256", "--seed", seed, "-o", path_str(&p)];
        args.extend(SMALL);
        assert!(qmetts(&args).status.success());
        std::fs::read(&p).unwrap()
    };
    let a = run("9");
    assert_eq!(a, run("9"));
    assert_ne!(a, run("10"));
}

#[test]
fn compare_against_oracle_and_self() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    let o = dir.path().join("o.csv");
    let report = dir.path().join("report.txt");
    let tail = ["--g2-stop", "0.4", "--k-steps", "20"];
    let mut args = vec!["sweep", "-o", path_str(&q)];
    args.extend(tail);
    assert!(qmetts(&args).status.success());
    let mut args = vec!["oracle", "--temperatures", "0.1,0.5", "-o", path_str(&o)];
    args.extend(tail);
    assert!(qmetts(&args).status.success());

    let out = qmetts(&["compare", path_str(&q), path_str(&o), "--temperature", "0.1", "--report", path_str(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&report).unwrap().trim_end().ends_with("# result=PASS"));

    assert_eq!(qmetts(&["compare", path_str(&q), path_str(&q)]).status.code(), Some(0));
    // A tolerance no simulation can meet fails with exit code 1.
    let out = qmetts(&["compare", path_str(&q), path_str(&o), "--tolerance", "1e-12"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_rejects_mismatched_models() {
    let dir = tempfile::tempdir().unwrap();
    let e = dir.path().join("e.csv");
    let m = dir.path().join("m.csv");
    for (variant, p) in [("euclidean", &e), ("minkowski", &m)] {
        let mut args = vec!["oracle", "--variant", variant, "--temperatures", "0.5", "-o", path_str(p)];
        args.extend(["--g2-stop", "0.2"]);
        assert!(qmetts(&args).status.success());
    }
    assert_eq!(qmetts(&["compare", path_str(&e), path_str(&m)]).status.code(), Some(1));
}

#[test]
fn validate_exit_codes() {
    let out = qmetts(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,status,detail"));
    assert!(!text.contains("FAIL"));

    let out = qmetts(&["validate", "--corrupt-mc"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn linear_breakdown_reports_step() {
    let out = qmetts(&["sweep", "--variant", "minkowski", "--g2-start", "3", "--g2-stop", "3", "--c-mode", "linear"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("g2 = 3") && err.contains("step"), "{err}");
    assert!(err.contains("non-positive"), "{err}");
}
