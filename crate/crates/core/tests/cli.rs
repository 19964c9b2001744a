use std::fs;
use std::path::Path;
use std::process::Command;

use seqbell::cli::{parse_config, run, Payload, Subcommand, EXIT_INPUT, EXIT_INTERNAL};
use seqbell::hvm::{build_contextual_model, noncontextual_feasibility, save_model, PairTargets};
use seqbell::inequality::{maximize_chsh, scan_grid, MaximizeOptions};
use seqbell::quantum::grand_joint_quantum;
use seqbell::sampler::sample;
use seqbell::{Mode, Scenario};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqbell"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const ZERO_SEQ: &str = r#"{"mode": "sequential", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0}"#;
const OPT_EPRB: &str = r#"{"mode": "eprb", "a": 0, "a_prime": 90, "b": 135, "b_prime": 225}"#;

#[test]
fn exact_table_for_aligned_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", ZERO_SEQ);
    let out = bin().args(["exact", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "A1,B1,A2,B2,probability");
    assert_eq!(lines.len(), 17);
    let row = lines.iter().find(|l| l.starts_with("1,-1,1,-1,")).unwrap();
    let p: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((p - 0.5).abs() <= 1e-15);
}

#[test]
fn reports_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"mode": "sequential", "a": 10, "a_prime": 70, "b": 33, "b_prime": 200, "n": 20000, "seed": 5}"#,
    );
    for cmd in ["exact", "sample", "chsh-scan", "hvm-check", "joint-feasibility"] {
        for fmt in ["csv", "json"] {
            let outputs: Vec<Vec<u8>> = (0..2)
                .map(|_| {
                    let path = dir.path().join(format!("{cmd}-{fmt}"));
                    let status = bin()
                        .args([cmd, "--format", fmt, "--config"])
                        .arg(&cfg)
                        .arg("--out")
                        .arg(&path)
                        .status()
                        .unwrap();
                    assert!(status.success(), "{cmd} {fmt}");
                    fs::read(&path).unwrap()
                })
                .collect();
            assert_eq!(outputs[0], outputs[1], "{cmd} {fmt}");
            assert!(!outputs[0].is_empty());
        }
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", ZERO_SEQ);
    let out = bin()
        .args(["sample", "--n", "1000", "--seed", "9", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    let d = grand_joint_quantum(&Scenario::from_degrees(Mode::Sequential, 0.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
    assert_eq!(row, sample(&d, 1000, 9).csv_row());
}

#[test]
fn chsh_max_eprb() {
    let cfg = parse_config(OPT_EPRB).unwrap();
    let report = run(Subcommand::ChshMax, &cfg).unwrap();
    let Payload::Optimum(opt) = &report.result else {
        panic!("wrong payload");
    };
    assert!((opt.abs_s - 2.828427).abs() <= 1e-6);
    let direct = maximize_chsh(
        Mode::Eprb,
        &MaximizeOptions {
            coarse_step: seqbell::cli::MAXIMIZE_COARSE_STEP,
            tol: seqbell::cli::MAXIMIZE_TOL,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(opt, &direct);
}

#[test]
fn joint_feasibility_verdicts() {
    let cfg = parse_config(r#"{"mode": "sequential", "a": 10, "a_prime": 70, "b": 33, "b_prime": 200}"#).unwrap();
    let report = run(Subcommand::JointFeasibility, &cfg).unwrap();
    let Payload::Feasibility { result, .. } = &report.result else {
        panic!("wrong payload");
    };
    assert!(result.is_feasible());
    let direct = noncontextual_feasibility(&PairTargets::from_scenario(&cfg.scenario().unwrap()).unwrap()).unwrap();
    assert_eq!(result, &direct);

    let report = run(Subcommand::JointFeasibility, &parse_config(OPT_EPRB).unwrap()).unwrap();
    assert!(report.to_csv().contains("verdict,infeasible"));
}

#[test]
fn scan_payload_matches_library() {
    let cfg = parse_config(r#"{"mode": "sequential", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0, "step": 30}"#).unwrap();
    let report = run(Subcommand::ChshScan, &cfg).unwrap();
    let Payload::Scan(scan) = &report.result else {
        panic!("wrong payload");
    };
    assert_eq!(scan, &scan_grid(Mode::Sequential, 30f64.to_radians()).unwrap());
    assert_eq!(report.exit_code(), 0);
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 1 + 12 * 12 * 12);
}

#[test]
fn hvm_check_with_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let sc = Scenario::from_degrees(Mode::Sequential, 5.0, 80.0, 40.0, 170.0).unwrap();
    let model_path = dir.path().join("model.json");
    save_model(&build_contextual_model(&sc).unwrap(), &model_path).unwrap();
    let body = format!(
        r#"{{"mode": "sequential", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0, "model": {:?}}}"#,
        model_path.to_str().unwrap()
    );
    let cfg = parse_config(&body).unwrap();
    let report = run(Subcommand::HvmCheck, &cfg).unwrap();
    let Payload::Hvm(h) = &report.result else {
        panic!("wrong payload");
    };
    assert!(h.factorizability.passed);
    assert!(h.reconstruction_deviation <= 1e-12);
    assert!(h.hv_correlators.max_abs_diff(&h.closed_form_correlators) <= 1e-12);
}

#[test]
fn error_exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", ZERO_SEQ);

    let out = bin().args(["frobnicate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INPUT));

    let bad = write_config(dir.path(), "bad.json", r#"{"mode": "eprb", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0, "foo": 1}"#);
    let out = bin().args(["exact", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));

    // grand joint is undefined in EPRB mode
    let eprb = write_config(dir.path(), "eprb.json", OPT_EPRB);
    let out = bin().args(["sample", "--config"]).arg(&eprb).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INPUT));

    let out = bin()
        .args(["exact", "--config"])
        .arg(&cfg)
        .args(["--out", "/nonexistent-dir/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INTERNAL));
}

#[test]
fn exact_eprb_emits_pair_table() {
    let report = run(Subcommand::Exact, &parse_config(OPT_EPRB).unwrap()).unwrap();
    let csv = report.to_csv();
    assert_eq!(csv.lines().next(), Some("pair,s1,s2,probability"));
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn json_report_carries_version_and_config() {
    let report = run(Subcommand::Exact, &parse_config(ZERO_SEQ).unwrap()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["subcommand"], "exact");
    assert_eq!(v["config"]["mode"], "sequential");
    assert_eq!(v["result"]["kind"], "distribution");
}
