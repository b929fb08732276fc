use std::process::Command;

use uniform_im::{CompetitorRegistry, DensitySpec, ModelSpec, SuffStat};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uniform-im"))
}

const EXAMPLE: [&str; 6] = ["--n", "25", "--min", "281.1", "--max", "9689.7"];

#[test]
fn analyze_prints_both_intervals() {
    let out = bin().arg("analyze").args(EXAMPLE).args(["--prs", "both"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("im-one-sided") && text.contains("(98.436"), "{text}");
    assert!(text.contains("im-default") && text.contains("105.93"), "{text}");
}

#[test]
fn analyze_reads_raw_data_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.txt");
    std::fs::write(&path, "0.31 0.45\n0.2, 0.77\n").unwrap();
    let out = bin()
        .args(["analyze", "--model", "location-unit", "--format", "json", "--data-file"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stat"]["n"], 4);
    assert_eq!(v["stat"]["x1"], 0.2);
}

#[test]
fn curve_csv_and_json() {
    let out = bin()
        .arg("curve")
        .args(EXAMPLE)
        .args(["--prs", "default", "--grid", "98,106,17"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,pl"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 17);
    assert_eq!(rows[0], "98.0,0.0");

    let out = bin()
        .arg("curve")
        .args(EXAMPLE)
        .args(["--format", "json", "--grid", "99,100,3"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["meta"]["prs"], "one-sided");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["analyze", "--n", "1", "--min", "1", "--max", "2"]), Some(2));
    assert_eq!(code(&["analyze", "--model", "location-unit", "--data", "0,1.5"]), Some(3));
    assert_eq!(code(&["curve", "--model", "bogus", "--data", "1,2"]), Some(2));
    assert_eq!(code(&["simulate", "--reps", "0"]), Some(2));
    assert_eq!(code(&["analyze", "--model", "linear", "--coef", "0,1,1", "--data", "1,2"]), Some(2));
}

#[test]
fn simulate_writes_reports_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str| {
        let csv = dir.path().join(format!("w{workers}.csv"));
        let json = dir.path().join(format!("w{workers}.json"));
        let out = bin()
            .args([
                "simulate", "--n-values", "2,5", "--theta-values", "2,10", "--reps", "50",
                "--methods", "im-one-sided,im-default,flat-bayes-hpd", "--workers", workers,
                "--quiet", "--csv",
            ])
            .arg(&csv)
            .arg("--json")
            .arg(&json)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(csv).unwrap(), std::fs::read(json).unwrap())
    };
    let (c1, j1) = run("1");
    let (c3, j3) = run("3");
    assert_eq!(c1, c3);
    assert_eq!(j1, j3);
    let text = String::from_utf8(c1).unwrap();
    assert!(text.starts_with("method,n,theta,coverage,"), "{text}");
    assert_eq!(text.lines().count(), 1 + 3 * 4);
}

#[test]
fn simulate_reads_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    std::fs::write(
        &cfg,
        "# small study\nmodel = linear\ncoef = 0, 0, 0, 1\nn_values = 3\ntheta_values = 1, 4\nreps = 40\n",
    )
    .unwrap();
    let out = bin().arg("simulate").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("model linear") && text.contains("40 reps"), "{text}");
}

#[test]
fn failed_simulation_flushes_partial_report() {
    let mut registry = CompetitorRegistry::new();
    registry.register(DensitySpec::new("broken", |_, _: &SuffStat, _: &ModelSpec| f64::NAN));
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("partial.csv");
    let json = dir.path().join("partial.json");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = uniform_im::cli::run(
        [
            "uniform-im", "simulate", "--n-values", "3", "--theta-values", "4", "--reps", "20",
            "--methods", "im-one-sided,custom:broken", "--csv", csv.to_str().unwrap(), "--json",
            json.to_str().unwrap(),
        ],
        &registry,
        &mut out,
        &mut err,
    );
    assert_eq!(code, 4);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("im-one-sided,3,4"), "{text}");
    assert!(text.lines().last().unwrap().starts_with("# FAILED:"), "{text}");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert!(v["failure"].is_string());
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}
