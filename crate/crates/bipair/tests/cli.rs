//! End-to-end checks of the command-line surface: determinism, header
//! echoes, exit codes, and atomic output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bipair_bin() -> &'static str {
    env!("CARGO_BIN_EXE_bipair")
}

fn run(args: &[&str]) -> Output {
    Command::new(bipair_bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("bipair_cli_tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn qscan_is_deterministic_and_echoes_config() {
    let out_a = temp_path("qscan_a.csv");
    let out_b = temp_path("qscan_b.csv");
    for (path, _) in [(&out_a, 0), (&out_b, 1)] {
        let out = run(&[
            "qscan",
            "--zeta-min",
            "0.5",
            "--zeta-max",
            "1.0",
            "--steps",
            "3",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "identical configs must produce byte-identical files");
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# q1 = 0, q2 = 0, n = 0, tail_tol = 1e-12, seed = 42"));
    assert!(text.contains("zeta_abs,q_numeric,q_closed"));
}

#[test]
fn invalid_config_exits_2_without_partial_file() {
    let out_path = temp_path("invalid.csv");
    let _ = std::fs::remove_file(&out_path);
    let out = run(&[
        "qscan",
        "--steps",
        "0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists(), "failed runs must not leave files behind");
    // unknown flags are configuration errors too (clap convention)
    let out = run(&["qscan", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nonconvergence_exits_4() {
    let out = run(&[
        "steady",
        "--g",
        "0.3",
        "--n1-cut",
        "6",
        "--n2-cut",
        "6",
        "--max-steps",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no convergence"));
}

#[test]
fn cg_table_matches_uniform_rows() {
    let out = run(&["cg", "--kmax", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("q1")) {
        let fields: Vec<&str> = line.split(',').collect();
        let k: f64 = fields[3].parse().unwrap();
        let formula: f64 = fields[6].parse().unwrap();
        assert!((formula - 1.0 / (k + 1.0).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn pk_distribution_normalizes() {
    let out = run(&["pk", "--zeta-abs", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let sum: f64 = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('k'))
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((sum - 1.0).abs() < 1e-10, "sum {sum}");
}

#[test]
fn steady_nullspace_reports_dark_decomposition() {
    let out_path = temp_path("steady.csv");
    let out = run(&[
        "steady",
        "--g",
        "0.1",
        "--n1-cut",
        "6",
        "--n2-cut",
        "6",
        "--dark-nmax",
        "1",
        "--method",
        "nullspace",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("dark-state residual"));
    assert!(summary.contains("n = 0: 1.0000"));
    let csv = std::fs::read_to_string(Path::new(&out_path)).unwrap();
    assert!(csv.contains("t,trace,purity,liouvillian_norm,dark_overlap"));
}

#[test]
fn overlap_emits_constant_ratio() {
    let out = run(&[
        "overlap",
        "--zeta-re",
        "0.8",
        "--zeta-im",
        "0.5",
        "--q1",
        "1",
        "--n",
        "1",
        "--samples",
        "6",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("zeta1c"))
        .map(|l| l.split(',').nth(8).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(ratios.len(), 6);
    for r in &ratios[1..] {
        assert!((r - ratios[0]).abs() / ratios[0].abs() < 1e-8);
    }
}

#[test]
fn verify_on_defaults_exits_0() {
    let out = run(&["verify"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        out.status.code(),
        Some(0),
        "verify failed:\n{text}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(text.contains("all invariants hold"));
    assert!(text.contains("PASS  specfun/bessel_wronskian"));
    assert!(text.contains("dynamics/steady_dark_condition"));
}
