//! End-to-end tests of the `nnrank` binary: exit codes, output formats,
//! stream discipline, and round trips.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nnrank"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_gap_matrix(dir: &Path) -> std::path::PathBuf {
    // Real rank 3, nonnegative rank 4.
    let path = dir.join("gap.json");
    fs::write(
        &path,
        r#"{"dims": [4, 4], "values": [1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0]}"#,
    )
    .unwrap();
    path
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["grank"]);
    assert_eq!(out.status.code(), Some(2), "missing required arg");
    assert!(stderr(&out).contains("--shape"));

    let out = run_in(dir.path(), &["grank", "--shape", "2,2,2", "--bogus"]);
    assert_eq!(out.status.code(), Some(2), "unknown flag");

    let out = run_in(dir.path(), &["grank", "--shape", "2,0,2"]);
    assert_eq!(out.status.code(), Some(2), "zero dimension");

    let out = run_in(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2), "unknown subcommand");

    let out = run_in(dir.path(), &["grank", "--shape", "2,2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2), "csv outside census");
}

#[test]
fn grank_prints_rank_first() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["grank", "--shape", "2,2,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("2"));

    let out = run_in(dir.path(), &["grank", "--shape", "2,2,2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["generic_rank"], 2);
    assert_eq!(v["jacobian"]["full_row_rank"], true);
    assert_eq!(v["fiber_mode"], 3);
}

#[test]
fn nnrank_gap_matrix_line() {
    let dir = TempDir::new().unwrap();
    let input = write_gap_matrix(dir.path());
    let out = run_in(dir.path(), &["nnrank", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "[4,4] exact (fooling-set / ntf-fit)");

    let out = run_in(
        dir.path(),
        &["nnrank", "--input", input.to_str().unwrap(), "--format", "json"],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["lower"], 4);
    assert_eq!(v["upper"], 4);
    assert_eq!(v["exact"], true);
}

#[test]
fn nnrank_rejects_negative_values() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("neg.json");
    fs::write(&path, r#"{"dims": [2, 2], "values": [1, -1, 0, 2]}"#).unwrap();
    let out = run_in(dir.path(), &["nnrank", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("negative"));
    assert!(stdout(&out).is_empty(), "errors go to stderr only");
}

#[test]
fn decompose_writes_reconstructible_terms() {
    let dir = TempDir::new().unwrap();
    let input = write_gap_matrix(dir.path());
    let out_path = dir.path().join("dec.json");
    let out = run_in(
        dir.path(),
        &[
            "decompose",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out_path.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["term_count"], 4);
    assert_eq!(v["terms"].as_array().unwrap().len(), 4);
}

#[test]
fn witness_and_certify_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["witness", "--shape", "2,2,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["support"].as_array().unwrap().len(), 4);
    let center = &v["center"];

    // Feed the center back as a tensor file: it must certify.
    let t0_path = dir.path().join("t0.json");
    fs::write(&t0_path, serde_json::to_string(center).unwrap()).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "certify-max",
            "--input",
            t0_path.to_str().unwrap(),
            "--shape",
            "2,2,2",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["certified_rank"], 4);
    assert_eq!(cert["distance"], "0");

    // A far tensor is rejected with a domain error.
    let far = dir.path().join("far.json");
    fs::write(&far, r#"{"dims": [2, 2, 2], "values": [1, 1, 1, 1, 1, 1, 1, 1]}"#).unwrap();
    let out = run_in(dir.path(), &["certify-max", "--input", far.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no certificate"));

    // Mismatched --shape is an error.
    let out = run_in(
        dir.path(),
        &[
            "certify-max",
            "--input",
            t0_path.to_str().unwrap(),
            "--shape",
            "2,2",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn typical_verify_pipe_accepts() {
    let dir = TempDir::new().unwrap();
    let gen = bin()
        .current_dir(dir.path())
        .args(["typical", "--shape", "2,2,2", "--r", "3", "--seed", "11"])
        .output()
        .unwrap();
    assert_eq!(gen.status.code(), Some(0), "stderr: {}", stderr(&gen));

    let mut verify = bin()
        .current_dir(dir.path())
        .args(["verify", "--cert", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    verify
        .stdin
        .take()
        .unwrap()
        .write_all(&gen.stdout)
        .unwrap();
    let out = verify.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "true");
}

#[test]
fn verify_rejects_tampered_certificate() {
    let dir = TempDir::new().unwrap();
    let cert_path = dir.path().join("cert.json");
    let out = run_in(
        dir.path(),
        &[
            "typical",
            "--shape",
            "2,2,2",
            "--r",
            "2",
            "--seed",
            "3",
            "--output",
            cert_path.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));

    // Scale the total by 2: pushed outside the ball.
    let text = fs::read_to_string(&cert_path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let total: Vec<String> = v["total"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            let x: f64 = s.as_str().unwrap().parse().unwrap();
            format!("{}", 2.0 * x)
        })
        .collect();
    v["total"] = serde_json::json!(total);
    let bad_path = dir.path().join("bad.json");
    fs::write(&bad_path, serde_json::to_string(&v).unwrap()).unwrap();

    let out = run_in(dir.path(), &["verify", "--cert", bad_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("false:"), "got: {text}");
    assert!(text.contains("outside ball"), "got: {text}");

    // Structurally broken JSON is rejected by the parser, also exit 1.
    fs::write(&bad_path, "{\"dims\": [2,2,2]}").unwrap();
    let out = run_in(dir.path(), &["verify", "--cert", bad_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn typical_out_of_range_rank_fails() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["typical", "--shape", "2,2,2", "--r", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("feasible range"), "stderr: {}", stderr(&out));

    let out = run_in(dir.path(), &["typical", "--shape", "2,2,2", "--r", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fixed_seed_outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = ["typical", "--shape", "2,2,3", "--r", "3", "--seed", "77"];
    let a = run_in(dir.path(), &args);
    let b = run_in(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "same seed must give identical bytes");

    let c = run_in(dir.path(), &["typical", "--shape", "2,2,3", "--r", "3", "--seed", "78"]);
    assert_ne!(a.stdout, c.stdout, "different seed should change the output");
}

#[test]
fn census_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "census", "--shape", "2,2", "--samples", "10", "--dist", "uniform01", "--seed", "5",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("census.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("sample_index,lower,upper,exact,lower_provenance,upper_provenance")
    );
    assert_eq!(csv.lines().count(), 11);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("census.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["samples"], 10);
    assert_eq!(json["grank_used"], 2);
    assert_eq!(json["range_check"], true);

    // Indicator-noise parses with a parameter.
    let out = run_in(
        dir.path(),
        &[
            "census",
            "--shape",
            "2,2",
            "--samples",
            "5",
            "--dist",
            "indicator-noise(0.001)",
            "--output",
            "noise",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("noise.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["distribution"], "indicator-noise(0.001)");
    assert_eq!(json["exact_fraction"], 1.0);
}
