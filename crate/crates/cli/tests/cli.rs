//! Exit-code contract and output determinism of the installed binary.

use std::path::Path;
use std::process::{Command, Output};

fn igeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igeo"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn igeo_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igeo"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary spawns")
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const EUCLIDEAN_2D: &str = "\
dim = 2
name = flat
domain = [-1, 1] [-1, 1]
g 1 1 = 1
g 2 2 = 1
";

const NORMAL_2D: &str = "\
dim = 2
name = normal
domain = [-1, 1] [0.5, 2]
g 1 1 = 1 / t2^2
g 2 2 = 2 / t2^2
Q 1 1 2 = 2 / t2^3
Q 2 2 2 = 8 / t2^3
";

#[test]
fn validate_accepts_a_flat_spec() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "flat.igm", EUCLIDEAN_2D);
    let out = igeo(&["validate", &file]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict: pass"), "{text}");
}

#[test]
fn unsorted_metric_indices_are_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(
        dir.path(),
        "bad.igm",
        "dim = 2\nname = bad\ndomain = [0, 1] [0, 1]\ng 2 1 = 1\n",
    );
    let out = igeo(&["validate", &file]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("index order"), "{err}");
}

#[test]
fn indefinite_metric_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(
        dir.path(),
        "notspd.igm",
        "dim = 2\nname = notspd\ndomain = [-1, 1] [-1, 1]\ng 1 1 = t1\ng 2 2 = 1\n",
    );
    let out = igeo(&["validate", &file]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict: fail"), "{text}");
}

#[test]
fn missing_input_file_is_a_usage_error() {
    let out = igeo(&["validate", "/definitely/not/here.igm"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_with_usage_code() {
    let out = igeo(&["check", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_points_is_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "flat.igm", EUCLIDEAN_2D);
    let out = igeo(&["check", &file, "--points", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = igeo(&["check", &file, "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_on_a_generated_spec_and_skips_conditionals() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.igm");
    let gen = igeo(&["random", "--dim", "2", "--seed", "7", "-o", file.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let out = igeo(&["check", file.to_str().unwrap(), "--points", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("duality"), "{text}");
    assert!(text.contains("skip"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn check_on_an_indefinite_metric_reports_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(
        dir.path(),
        "notspd.igm",
        "dim = 2\nname = notspd\ndomain = [-1, 1] [-1, 1]\ng 1 1 = t1\ng 2 2 = 1\n",
    );
    let out = igeo(&["check", &file]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("verdict: fail"), "{err}");
}

#[test]
fn non_finite_alpha_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "flat.igm", EUCLIDEAN_2D);
    let out = igeo(&["check", &file, "--alpha", "nan", "--points", "8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_report_is_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.igm");
    igeo(&["random", "--dim", "3", "--seed", "42", "-o", file.to_str().unwrap()]);
    let args = ["check", file.to_str().unwrap(), "--points", "50", "--json"];
    let first = igeo_with_threads(&args, "1");
    assert_eq!(first.status.code(), Some(0));
    for threads in ["1", "4", "8"] {
        let next = igeo_with_threads(&args, threads);
        assert_eq!(next.stdout, first.stdout, "threads = {threads}");
    }
}

#[test]
fn json_report_has_the_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "normal.igm", NORMAL_2D);
    let out = igeo(&["check", &file, "--points", "40", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["manifold"], "normal");
    assert_eq!(v["seed"], 0);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 20);
    for c in checks {
        assert!(c["name"].is_string());
        assert!(c["alpha"].is_array());
        assert!(c["verdict"].is_string());
    }
    // The normal family is conjugate Ricci-symmetric, so the theorem
    // rows must actually run rather than skip.
    let implication = checks
        .iter()
        .find(|c| c["name"] == "conjugate_ricci_implies_equiaffine")
        .unwrap();
    assert_eq!(implication["verdict"], "pass");
}

#[test]
fn prior_on_a_flat_spec_is_identically_zero() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "flat.igm", EUCLIDEAN_2D);
    let out = igeo(&["prior", &file, "--alpha", "1.5", "--grid", "4,4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let last = line.rsplit(',').next().unwrap();
        assert_eq!(last.parse::<f64>().unwrap(), 0.0, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 16);
    assert!(text.starts_with("t1,t2,log_f\n"), "{text}");
}

#[test]
fn prior_refuses_a_generic_spec_away_from_closedness() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.igm");
    igeo(&["random", "--dim", "2", "--seed", "3", "-o", file.to_str().unwrap()]);
    let out = igeo(&["prior", file.to_str().unwrap(), "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("not equiaffine at alpha=1"), "{err}");
}

#[test]
fn prior_writes_csv_to_the_requested_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "normal.igm", NORMAL_2D);
    let out_path = dir.path().join("prior.csv");
    let out = igeo(&[
        "prior",
        &file,
        "--alpha",
        "0",
        "--grid",
        "5,5",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("t1,t2,log_f\n"));
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn normalize_shifts_every_row_by_one_constant() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "normal.igm", NORMAL_2D);
    let plain = igeo(&["prior", &file, "--alpha", "0", "--grid", "4,4"]);
    let scaled = igeo(&["prior", &file, "--alpha", "0", "--grid", "4,4", "--normalize"]);
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(scaled.status.code(), Some(0));
    let parse = |out: &Output| -> Vec<f64> {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    let a = parse(&plain);
    let b = parse(&scaled);
    let shift = a[0] - b[0];
    assert!(shift != 0.0);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y - shift).abs() < 1e-12);
    }
}

#[test]
fn prior_grid_and_base_are_validated_against_the_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "flat.igm", EUCLIDEAN_2D);
    let out = igeo(&["prior", &file, "--alpha", "0", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = igeo(&["prior", &file, "--alpha", "0", "--grid", "4,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = igeo(&["prior", &file, "--alpha", "0", "--base", "0.0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = igeo(&["prior", &file, "--alpha", "0", "--base", "0,9.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn random_is_reproducible_and_amplitude_zero_degenerates() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.igm");
    let b = dir.path().join("b.igm");
    for path in [&a, &b] {
        let out = igeo(&["random", "--dim", "3", "--seed", "0", "-o", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let flat = dir.path().join("flat.igm");
    igeo(&[
        "random",
        "--dim",
        "2",
        "--seed",
        "5",
        "--amplitude",
        "0",
        "-o",
        flat.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&flat).unwrap();
    assert!(!text.contains('Q'), "{text}");
    assert!(text.contains("g 1 1 = 1"), "{text}");
}

#[test]
fn random_rejects_out_of_range_dimensions() {
    let out = igeo(&["random", "--dim", "9", "--seed", "0", "-o", "/tmp/x.igm"]);
    assert_eq!(out.status.code(), Some(2));
    let out = igeo(&["random", "--dim", "0", "--seed", "0", "-o", "/tmp/x.igm"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_files_round_trip_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r4.igm");
    igeo(&["random", "--dim", "4", "--seed", "9", "-o", file.to_str().unwrap()]);
    let out = igeo(&["check", file.to_str().unwrap(), "--points", "40"]);
    assert_eq!(out.status.code(), Some(0));
}
