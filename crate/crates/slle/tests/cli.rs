//! End-to-end tests of the `slle` binary: exit codes, help text, config-file
//! resolution, CSV input, and output formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_slle")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("slle-cli-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn hex_f64(s: &str) -> f64 {
    f64::from_bits(u64::from_str_radix(s, 16).unwrap())
}

#[test]
fn ppca_on_noiseless_affine_patch_reports_tiny_sigma2() {
    let out = tmp("ppca-affine");
    let output = run(&[
        "fit-ppca",
        "--dataset",
        "affine_patch",
        "--n",
        "250",
        "--noise",
        "0",
        "--q",
        "2",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(doc["type"], "ppca");
    assert_eq!(doc["d"], 5);
    assert_eq!(doc["q"], 2);
    let sigma2 = hex_f64(doc["noise"][0].as_str().unwrap());
    assert!(sigma2 <= 1e-10, "σ² = {sigma2:.3e}");
}

#[test]
fn missing_k_exits_with_invalid_config() {
    let output = run(&["fit-slle", "--n", "30"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--k"), "stderr should name the flag: {stderr}");
    assert!(stderr.contains("error_code=invalid_config"), "{stderr}");
}

#[test]
fn bad_flag_value_exits_with_invalid_config() {
    let output = run(&["fit-slle", "--k", "4", "--mode", "bogus"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error_code=invalid_config"), "{stderr}");
}

#[test]
fn verify_suite_exits_zero_and_prints_checks() {
    let output = run(&["verify", "--seed", "5"]);
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    for name in [
        "gradient_fidelity",
        "spherical_closed_form",
        "em_monotonicity",
        "minimum_norm_posterior",
    ] {
        assert!(stdout.contains(name), "missing check {name}: {stdout}");
    }
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn help_lists_every_flag_with_defaults() {
    for sub in ["fit-slle", "fit-lle", "fit-fa", "fit-ppca", "compare", "verify"] {
        let output = run(&[sub, "--help"]);
        assert!(output.status.success(), "{sub} --help failed");
        let text = String::from_utf8_lossy(&output.stdout);
        for flag in [
            "--dataset", "--n", "--noise", "--seed", "--k", "--p", "--q", "--mode",
            "--max-iter", "--tol", "--lr", "--grad-steps", "--extract", "--scatter",
            "--csv", "--out", "--config",
        ] {
            assert!(text.contains(flag), "{sub} --help missing {flag}");
        }
        for default in [
            "[default: swiss_roll]",
            "[default: 500]",
            "[default: 0]",
            "[default: 2]",
            "[default: spherical]",
            "[default: 100]",
            "[default: 1e-6]",
            "[default: 1e-3]",
            "[default: 5]",
            "[default: mean]",
            "[default: global]",
            "[default: out]",
        ] {
            assert!(text.contains(default), "{sub} --help missing {default}");
        }
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let conf = tmp("base.conf");
    std::fs::write(&conf, "dataset=s_curve\nn=50\nk=3\nseed=2\n").unwrap();
    let out = tmp("config-run");
    let output = run(&[
        "fit-lle",
        "--config",
        conf.to_str().unwrap(),
        "--k",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    // k from the flag (4) wins over the file (3): 4 neighbors per point.
    let weights = std::fs::read_to_string(out.join("weights.csv")).unwrap();
    let rows_for_point0 = weights
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("0,"))
        .count();
    assert_eq!(rows_for_point0, 4);
}

#[test]
fn unknown_config_key_is_invalid() {
    let conf = tmp("bad.conf");
    std::fs::write(&conf, "k=4\nwat=1\n").unwrap();
    let output = run(&["fit-lle", "--config", conf.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn csv_input_round_trips_through_fit_lle() {
    let csv = tmp("input.csv");
    let mut text = String::new();
    for i in 0..40 {
        let t = i as f64 * 0.37;
        text.push_str(&format!("{},{},{}\n", t.cos(), t.sin(), 0.1 * t));
    }
    std::fs::write(&csv, text).unwrap();
    let out = tmp("csv-run");
    let output = run(&[
        "fit-lle",
        "--csv",
        csv.to_str().unwrap(),
        "--k",
        "3",
        "--p",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let embedding = std::fs::read_to_string(out.join("embedding.csv")).unwrap();
    assert_eq!(embedding.lines().count(), 41); // header + 40 rows
}

#[test]
fn malformed_csv_is_invalid_config_with_location() {
    let csv = tmp("bad.csv");
    std::fs::write(&csv, "1,2\n3,oops\n").unwrap();
    let output = run(&["fit-lle", "--csv", csv.to_str().unwrap(), "--k", "1"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn fit_slle_full_mode_runs() {
    let out = tmp("full-mode");
    let output = run(&[
        "fit-slle",
        "--dataset",
        "gaussian_blobs",
        "--n",
        "36",
        "--noise",
        "0.5",
        "--k",
        "3",
        "--mode",
        "full",
        "--max-iter",
        "4",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let lines = trace.lines().count();
    assert!((2..=5).contains(&lines), "trace has {lines} lines"); // header + <= 4 iterations
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("iter=1 objective="), "{stderr}");
}

#[test]
fn compare_writes_metrics_for_both_methods() {
    let out = tmp("compare");
    let output = run(&[
        "compare",
        "--dataset",
        "swiss_roll",
        "--n",
        "80",
        "--k",
        "5",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "method,reconstruction_residual,neighborhood_preservation");
    assert!(lines[1].starts_with("slle,"));
    assert!(lines[2].starts_with("lle,"));
    // Timings are reported on the diagnostic stream, not in the metrics file.
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("timing method=slle"), "{stderr}");
}
