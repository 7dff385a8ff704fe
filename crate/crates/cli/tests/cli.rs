use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singlet-bound"))
        .args(args)
        .env_remove("SINGLET_BOUND_SEED")
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn close(v: &Value, want: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() <= tol
}

#[test]
fn analyze_family_half() {
    let r = json(&["analyze", "--family", "0.5"]);
    assert!(close(&r["singlet_fraction"], 0.5, 1e-12));
    assert!(close(&r["teleportation_fidelity"], 2.0 / 3.0, 1e-12));
    assert_eq!(r["useful_for_teleportation"], false);
    assert!(close(&r["f_d_closed"]["value"], 0.75, 1e-12));
}

#[test]
fn analyze_pure_bell_member() {
    let r = json(&["analyze", "--family", "1.0"]);
    assert!(close(&r["singlet_fraction"], 1.0, 1e-12));
    assert!(close(&r["teleportation_fidelity"], 1.0, 1e-12));
    assert!(close(&r["concurrence"], 1.0, 1e-10));
}

#[test]
fn analyze_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("maximally_mixed.json");
    let q = "[[0.25,0],[0,0],[0,0],[0,0]]";
    let rows = [
        q.to_string(),
        "[[0,0],[0.25,0],[0,0],[0,0]]".into(),
        "[[0,0],[0,0],[0.25,0],[0,0]]".into(),
        "[[0,0],[0,0],[0,0],[0.25,0]]".into(),
    ];
    fs::write(&path, format!("{{\"matrix\": [{}]}}", rows.join(","))).unwrap();
    let r = json(&["analyze", "--state", path.to_str().unwrap()]);
    assert!(close(&r["singlet_fraction"], 0.25, 1e-12));
    assert_eq!(r["entangled_ppt"], false);
}

#[test]
fn invalid_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#).unwrap();
    for args in [
        vec!["analyze", "--state", path.to_str().unwrap()],
        vec!["analyze", "--state", "/nonexistent/state.json"],
        vec!["analyze", "--family", "1.5"],
        vec!["analyze", "--family", "0.5", "--state", "x.json"],
        vec!["sweep", "--from", "0.2"],
        vec!["sweep", "--from", "0.6", "--to", "0.5"],
        vec!["sweep", "--step", "0"],
        vec!["verify", "--trials", "0"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn non_hermitian_state_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("skew.json");
    let rows = [
        "[[0.5,0],[0.1,0],[0,0],[0,0]]",
        "[[0,0],[0.5,0],[0,0],[0,0]]",
        "[[0,0],[0,0],[0,0],[0,0]]",
        "[[0,0],[0,0],[0,0],[0,0]]",
    ];
    fs::write(&path, format!("{{\"matrix\": [{}]}}", rows.join(","))).unwrap();
    let out = run(&["analyze", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr).to_lowercase();
    assert!(msg.contains("hermitian"), "{msg}");
}

#[test]
fn sweep_rows_and_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--from",
        "0.5",
        "--to",
        "0.8",
        "--step",
        "0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "F,overlap,singlet_fraction,F_star_closed,F_star_numeric,F_D_closed_low,F_D_closed_high,f_T,p_ab_min_closed,F_opt_closed,concurrence"
    );
    // 0.5, 0.6, 2/3, 0.7, 0.8
    assert_eq!(lines.len(), 6);
    let cells = |i: usize| lines[i].split(',').collect::<Vec<_>>();
    assert_eq!(cells(1)[3], "0.5625");
    assert_eq!(cells(1)[5], "0.75");
    assert_eq!(cells(1)[4], "");
    let boundary = cells(3);
    assert_eq!(boundary[0], "0.666666666667");
    assert_eq!(boundary[5], "1");
    assert_eq!(boundary[6], "0.666666666667");
    let last = cells(5);
    assert!(last[0].starts_with("0.8"));
    assert_eq!(last[5], "");
    assert_eq!(last[6], "0.8");
    assert_eq!(last[8], "");
    assert_eq!(last[9], "");
}

#[test]
fn sweep_numeric_column() {
    let out = run(&[
        "sweep",
        "--from",
        "0.4",
        "--to",
        "0.45",
        "--step",
        "0.05",
        "--numeric",
        "--restarts",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line
            .split(',')
            .take(5)
            .map(|c| c.parse().unwrap())
            .collect();
        assert!((cells[4] - cells[3]).abs() <= 1e-3, "{line}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        vec![
            "sweep",
            "--from",
            "0.4",
            "--to",
            "0.5",
            "--step",
            "0.05",
            "--numeric",
            "--restarts",
            "4",
        ],
        vec!["optimize-filter", "--family", "0.45", "--seed", "3"],
        vec!["analyze", "--family", "0.55", "--restarts", "4"],
    ] {
        assert_eq!(run(&args).stdout, run(&args).stdout, "{args:?}");
    }
}

#[test]
fn seed_from_environment_and_flag_precedence() {
    let with_env = |seed: &str, args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_singlet-bound"))
            .args(args)
            .env("SINGLET_BOUND_SEED", seed)
            .output()
            .unwrap()
    };
    let args = ["optimize-filter", "--family", "0.4", "--restarts", "2"];
    let from_env: Value = serde_json::from_slice(&with_env("9", &args).stdout).unwrap();
    assert_eq!(from_env["seed"], 9);
    let mut flagged = args.to_vec();
    flagged.extend(["--seed", "5"]);
    let from_flag: Value = serde_json::from_slice(&with_env("9", &flagged).stdout).unwrap();
    assert_eq!(from_flag["seed"], 5);
    let default: Value = json(&args);
    assert_eq!(default["seed"], 42);
}

#[test]
fn optimize_filter_examples() {
    let r = json(&["optimize-filter", "--family", "0.5", "--seed", "1"]);
    assert!(close(&r["F_after"], 0.5625, 1e-3));
    assert!(close(&r["F_before"], 0.5, 1e-12));
    let r = json(&["optimize-filter", "--family", "0.9"]);
    assert!(close(&r["F_after"], 0.9, 1e-3));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.json");
    let h = "[0.5,0]";
    let z = "[0,0]";
    let matrix =
        format!("[[{h},{z},{z},{h}],[{z},{z},{z},{z}],[{z},{z},{z},{z}],[{h},{z},{z},{h}]]");
    fs::write(&path, format!("{{\"matrix\": {matrix}}}")).unwrap();
    let r = json(&["optimize-filter", "--state", path.to_str().unwrap()]);
    assert!(r["F_after"].as_f64().unwrap() >= 1.0 - 1e-6);
}

#[test]
fn verify_smoke_and_mutation() {
    let out = run(&["verify", "--trials", "1", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for suite in [
        "eigensolver",
        "fang_sandwich",
        "dembo_validity",
        "oracle_agreement",
        "family_closed_form",
        "double_filter_identity",
    ] {
        assert!(text.contains(suite), "{suite} missing from {text}");
    }

    let out = run(&[
        "verify",
        "--trials",
        "20",
        "--inject-mutation",
        "drop-dembo-sqrt",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("first failure: trial"), "{text}");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["sweep", "--help"]).status.code(), Some(0));
}
