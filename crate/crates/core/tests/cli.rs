//! End-to-end checks of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_bsde-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("BSDE_LAB_OUT")
        .output()
        .expect("spawn bsde-lab")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn asset(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel).display().to_string()
}

#[test]
fn exit_codes() {
    let bad_m = run(&["solve", "catalog:quadratic-sine", "-n", "4", "-P", "100", "-M", "0.5"]);
    assert_eq!(bad_m.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_m.stderr).contains("M"));

    let missing = run(&["solve", "no-such-problem.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no-such-problem.json"));

    let unknown = run(&["check", "catalog:nope"]);
    assert_eq!(unknown.status.code(), Some(1));

    let ok = run(&["solve", "catalog:heat-linear", "-n", "4", "-P", "1000"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn check_json_reports_threshold_and_envelopes() {
    let v = json_stdout(&run(&["check", "catalog:quadratic-sine", "--json"]));
    assert_eq!(v["envelope"]["kind"], "b2-envelope");
    assert!(v["lipschitz_envelope"].is_object());

    let text = run(&["check", &asset("problems/ou-quadratic-2d.json")]);
    assert!(text.status.success());
    assert!(String::from_utf8_lossy(&text.stdout).contains("regime"));
}

#[test]
fn solve_prints_summary() {
    let v = json_stdout(&run(&[
        "solve",
        "catalog:quadratic-linear",
        "-n",
        "8",
        "-P",
        "5000",
        "-M",
        "6",
        "-e",
        "global:2",
        "-s",
        "3",
        "--replicas",
        "2",
    ]));
    for key in [
        "Y0_mean",
        "Y0_stderr",
        "Z0_mean",
        "runtime",
        "n",
        "P",
        "M",
        "estimator",
        "variant",
        "seed",
        "rank_deficient_steps",
        "Y0_run_std",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["n"], 8);
    assert_eq!(v["M"], 6.0);
    assert_eq!(v["replicas"]["y0"].as_array().map(Vec::len), Some(3));
    // u(0, 0) = (T - t)/2 = 0.5 for the linear terminal problem
    assert!((v["Y0_mean"].as_f64().unwrap() - 0.5).abs() < 0.05);
}

#[test]
fn study_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.json");
    std::fs::write(
        &cfg,
        r#"{"problem": "catalog:lipschitz-sine", "n_values": [2, 4, 8], "P": 4000,
            "estimator": {"kind": "partitioning", "bins": 16, "range": {"policy": "min-max"}},
            "seeds": [1], "reference": {"kind": "closed-form"}}"#,
    )
    .unwrap();
    let cfg = cfg.display().to_string();
    let mut outputs = Vec::new();
    for (threads, sub) in [("1", "a"), ("4", "b")] {
        let out_dir = dir.path().join(sub);
        let out = run(&["--threads", threads, "--out", out_dir.to_str().unwrap(), "study", &cfg]);
        let v = json_stdout(&out);
        assert_eq!(v["reports"].as_array().map(Vec::len), Some(3), "{v}");
        let csv = std::fs::read_to_string(out_dir.join("study.csv")).unwrap();
        outputs.push((out.stdout, csv));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn pde_grid() {
    let v = json_stdout(&run(&[
        "pde",
        "catalog:quadratic-linear",
        "-n",
        "8",
        "-P",
        "4000",
        "-M",
        "8",
        "-e",
        "global:2",
        "--t-grid",
        "0,0.5,1",
        "--x-grid",
        "-1;0;1",
    ]));
    let u = v["u"].as_array().unwrap();
    assert_eq!(u.len(), 3);
    for (j, t) in [0.0, 0.5, 1.0].iter().enumerate() {
        for (i, x) in [-1.0, 0.0, 1.0].iter().enumerate() {
            let got = u[j][i].as_f64().unwrap();
            assert!((got - (x + (1.0 - t) / 2.0)).abs() < 0.05, "u({t}, {x}) = {got}");
        }
    }
}
