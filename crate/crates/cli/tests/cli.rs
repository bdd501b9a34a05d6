//! End-to-end runs of the `hyperperc` binary: exit codes, config layering and
//! byte-identical artifacts across worker counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hyperperc"));
    c.env_remove("HYPERPERC_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn case(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("cases").join(name)
}

fn csv_rows(bytes: &[u8]) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn theta_at_zero_length_estimates_p() {
    let o = run(&["theta", "--lambda", "1", "--p", "0.3", "--n", "0", "--trials", "10000", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    let (theta, se): (f64, f64) = (rows[0][2].parse().unwrap(), rows[0][3].parse().unwrap());
    assert!((theta - 0.3).abs() <= 3.0 * se, "{theta} +- {se}");
    assert_eq!(&rows[0][6..], ["7", "10000", env!("CARGO_PKG_VERSION")]);
}

#[test]
fn out_of_range_p_is_a_usage_error_naming_p() {
    let o = run(&["theta", "--p", "1.5", "--n", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`p`"), "{}", stderr(&o));
}

#[test]
fn estimators_refuse_to_run_without_a_seed() {
    let o = run(&["theta", "--p", "0.5", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn malformed_config_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"p\": 0.5,\n  \"trials\": ,\n}\n").unwrap();
    let o = run(&["theta", "--config", path.to_str().unwrap(), "--n", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:3:"), "{}", stderr(&o));

    std::fs::write(&path, r#"{"p": 0.5, "lamda": 1}"#).unwrap();
    let o = run(&["theta", "--config", path.to_str().unwrap(), "--n", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lamda"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"command": "theta", "p": [0.2, 0.6], "n": 1, "trials": 50, "seed": 4}"#).unwrap();
    let cfg = path.to_str().unwrap();

    let o = run(&["theta", "--config", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[7] == "50" && r[6] == "4"));

    let o = run(&["theta", "--config", cfg, "--trials", "20", "--p", "0.4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.4);
    assert_eq!(rows[0][7], "20");
}

#[test]
fn osss_verify_dictator() {
    let o = run(&["osss-verify", "--case", case("dictator2.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["result"]["reports"][0];
    assert_eq!(r["variance"], "1/4");
    assert_eq!(r["rhs"], "1/2");
    assert_eq!(r["holds"], true);
    assert_eq!(v["command"], "osss-verify");
}

#[test]
fn osss_verify_rejects_a_tree_that_does_not_compute_the_function() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wrong.json");
    let text = std::fs::read_to_string(case("dictator2.json")).unwrap().replace("\"leaf\": 1", "\"leaf\": 0");
    std::fs::write(&path, text).unwrap();
    let o = run(&["osss-verify", "--case", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn failing_audit_exits_with_one() {
    let o = run(&["sharpness", "--p", "0.3,0.4,0.5", "--n-max", "2", "--c", "1000", "--trials", "300", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["passes"], false);
}

fn artifact(args: &[&str], workers: Option<&str>, env: Option<&str>) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut c = bin();
    c.args(args).arg("--output").arg(&out);
    if let Some(w) = workers {
        c.args(["--workers", w]);
    }
    if let Some(w) = env {
        c.env("HYPERPERC_WORKERS", w);
    }
    let o = c.output().unwrap();
    assert!(matches!(o.status.code(), Some(0 | 1)), "{args:?}: {}", stderr(&o));
    std::fs::read(out).unwrap()
}

#[test]
fn artifacts_do_not_depend_on_worker_count() {
    let commands: [&[&str]; 6] = [
        &["theta", "--p", "0.3,0.5,0.7", "--n", "0,1,2", "--trials", "300", "--seed", "11"],
        &["pc", "--n", "3", "--trials", "200", "--seed", "12"],
        &["reveal", "--p", "0.5", "--n", "2", "--k", "1", "--trials", "30", "--seed", "13"],
        &["influence", "--p", "0.5", "--n", "1", "--trials", "30", "--seed", "14"],
        &["lemma4-audit", "--p", "0.5", "--n", "1", "--trials", "30", "--seed", "15"],
        &["russo-audit", "--p", "0.5", "--n", "1", "--trials", "100", "--seed", "16"],
    ];
    for args in commands {
        let one = artifact(args, Some("1"), None);
        assert!(!one.is_empty());
        assert_eq!(one, artifact(args, Some("4"), None), "{args:?}");
        assert_eq!(one, artifact(args, None, Some("3")), "{args:?}");
        assert_eq!(one, artifact(args, Some("1"), None), "{args:?}");
    }
}

#[test]
fn bad_worker_env_is_rejected() {
    let o = bin().args(["theta", "--p", "0.5", "--n", "0", "--seed", "1"]).env("HYPERPERC_WORKERS", "zero").output();
    let o = o.unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("HYPERPERC_WORKERS"));
}

#[test]
fn every_subcommand_has_help() {
    for cmd in [
        "theta", "pc", "decay", "meanfield", "russo-audit", "fkg-audit", "osss-verify", "reveal", "influence",
        "lemma4-audit", "sharpness", "sectors",
    ] {
        let o = run(&[cmd, "--help"]);
        assert!(o.status.success(), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("--seed"), "{cmd}");
    }
}

#[test]
fn sectors_summary_lists_ring_counts() {
    let o = run(&["sectors", "--epsilon", "0.5", "--radius", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rings = v["result"]["rings"].as_array().unwrap();
    assert_eq!(rings[0]["count"], 1);
    // N_1 = floor(sinh(1.5) / sinh(0.5)) + 1
    assert_eq!(rings[1]["count"], 5);
}

#[test]
fn decay_writes_fit_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let o = run(&[
        "decay", "--p", "0.1", "--n", "0.5,1,1.5,2", "--trials", "2000", "--seed", "5", "--points",
        pts.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["result"]["fit"]["slope"].as_f64().unwrap() < 0.0);
    assert_eq!(csv_rows(&std::fs::read(pts).unwrap()).len(), 4);
}
