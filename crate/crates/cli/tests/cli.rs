use std::path::Path;
use std::process::{Command, Output};

use sobi_eeg::io::read_recording;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobi-eeg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert_eq!(
        code(&out),
        0,
        "{args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn full_workflow() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--out", "d.csv", "--seed", "5", "--trials-per-class", "10"]);
    for f in ["d.csv", "d.meta.json", "d.sources.csv", "d.mixing.csv", "d.clean.csv"] {
        assert!(d.join(f).exists(), "{f} missing");
    }

    let stdout = ok(d, &["sobi", "d.csv", "--method", "jacobi", "--lags", "1..5"]);
    assert!(stdout.contains("jacobi"));
    let summary = json(&d.join("d.jacobi.result.json"));
    assert_eq!(summary["method"], "jacobi");
    assert_eq!(summary["lags"].as_array().unwrap().len(), 5);
    assert!(summary["elapsed_seconds"].as_f64().unwrap() > 0.0);
    assert!(summary.get("sources").is_none());
    let sources = read_recording(&d.join("d.jacobi.csv")).unwrap();
    let input = read_recording(&d.join("d.csv")).unwrap();
    assert_eq!(sources.samples(), input.samples());

    ok(d, &["sobi", "d.csv", "--out", "sep"]);
    assert_eq!(json(&d.join("sep.result.json"))["method"], "schur");

    let stdout = ok(d, &["clean", "d.csv", "--out", "c.csv"]);
    assert!(stdout.contains("removed components"));
    assert_eq!(read_recording(&d.join("c.csv")).unwrap().channels(), input.channels());
    ok(d, &["features", "c.csv", "--out", "fc.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("fc.csv")).unwrap().lines().count(), 1 + 20);

    ok(d, &["features", "d.csv", "--out", "f.csv"]);
    let table = std::fs::read_to_string(d.join("f.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 20);
    assert!(table.starts_with("trial,label,mu_ch0"));

    ok(d, &["train", "f.csv", "--seed", "1", "--out", "m.json"]);
    assert_eq!(json(&d.join("m.json"))["format_version"], 1);

    let preds = ok(d, &["predict", "m.json", "f.csv"]);
    assert_eq!(preds.lines().next(), Some("trial,predicted,decision"));
    assert_eq!(preds.lines().count(), 21);
    ok(d, &["predict", "m.json", "f.csv", "--out", "p.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("p.csv")).unwrap(), preds);

    let stdout = ok(d, &["pipeline", "d.csv", "--seed", "2", "--method", "both", "--folds", "4", "--out", "r.json"]);
    assert!(stdout.contains("schur: cross-validated accuracy"));
    assert!(stdout.contains("jacobi: cross-validated accuracy"));
    let report = json(&d.join("r.json"));
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn features_of_a_plain_recording() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--out", "d.csv", "--seed", "8", "--trials-per-class", "2"]);
    ok(d, &["sobi", "d.csv", "--out", "s"]);
    ok(d, &["features", "s.csv", "--bands", "mu:8:12", "--out", "f.csv"]);
    let table = std::fs::read_to_string(d.join("f.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("all,,"));
    // Unlabeled rows cannot train.
    assert_eq!(code(&run(d, &["train", "f.csv", "--seed", "1", "--out", "m.json"])), 2);
}

#[test]
fn pipeline_config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--out", "d.csv", "--seed", "9", "--trials-per-class", "6"]);
    std::fs::write(d.join("cfg.json"), r#"{"method": "jacobi", "folds": 3, "lags": [1, 2, 3]}"#).unwrap();
    let stdout = ok(d, &["pipeline", "d.csv", "--config", "cfg.json", "--seed", "1"]);
    assert!(stdout.contains("jacobi: cross-validated accuracy"));
    assert!(stdout.contains("(3 folds)"));
    let stdout = ok(d, &["pipeline", "d.csv", "--config", "cfg.json", "--method", "schur", "--seed", "1"]);
    assert!(stdout.contains("schur:") && !stdout.contains("jacobi:"));

    std::fs::write(d.join("bad.json"), r#"{"folds": 1}"#).unwrap();
    assert_eq!(code(&run(d, &["pipeline", "d.csv", "--config", "bad.json", "--seed", "1"])), 1);
}

#[test]
fn small_benchmark_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let stdout = ok(
        d,
        &["bench", "--datasets", "2", "--channels", "4", "--samples", "2000", "--repetitions", "3", "--seed", "1", "--out", "b.json"],
    );
    assert!(stdout.contains("Published ratios"));
    let report = json(&d.join("b.json"));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let (s, j, ratio) = (
            r["time_schur_s"].as_f64().unwrap(),
            r["time_jacobi_s"].as_f64().unwrap(),
            r["ratio"].as_f64().unwrap(),
        );
        assert!(s > 0.0 && j > 0.0);
        assert!((ratio - j / s).abs() < 1e-9 * ratio);
    }
    assert_eq!(code(&run(d, &["bench", "--repetitions", "2", "--seed", "1"])), 1);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(code(&run(d, &["--help"])), 0);
    assert_eq!(code(&run(d, &["--version"])), 0);
    assert_eq!(code(&run(d, &["sobi", "--help"])), 0);
    assert_eq!(code(&run(d, &["--bogus"])), 1);
    assert_eq!(code(&run(d, &["sobi", "x.csv", "--method", "qr"])), 1);
    assert_eq!(code(&run(d, &["sobi", "x.csv", "--lags", "5..2"])), 1);
    assert_eq!(code(&run(d, &["gen", "--out", "g.csv"])), 1);

    assert_eq!(code(&run(d, &["sobi", "missing.csv"])), 2);
    std::fs::write(d.join("bad.csv"), "1,2\n3,x\n").unwrap();
    std::fs::write(d.join("bad.meta.json"), r#"{"format_version": 1, "sample_rate": 100}"#).unwrap();
    let out = run(d, &["sobi", "bad.csv"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    std::fs::write(d.join("f.csv"), "trial,label,a\n0,3,1.0\n").unwrap();
    let out = run(d, &["train", "f.csv", "--seed", "1", "--out", "m.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn lag_larger_than_recording_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--out", "d.csv", "--seed", "4", "--trials-per-class", "1"]);
    let out = run(d, &["sobi", "d.csv", "--lags", "1000000"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}
