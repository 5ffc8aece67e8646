//! End-to-end tests of the binary: pipelines between subcommands, exit
//! codes, and byte-level determinism across runs and worker counts.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqpovm"))
}

fn run(args: &[&str], stdin: Option<&str>, envs: &[(&str, &str)]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    cmd.env_remove("SEQPOVM_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.stdin(if stdin.is_some() {
        Stdio::piped()
    } else {
        Stdio::null()
    });
    cmd.stdout(Stdio::piped());
    cmd.stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("spawn seqpovm");
    if let Some(data) = stdin {
        child
            .stdin
            .as_mut()
            .unwrap()
            .write_all(data.as_bytes())
            .unwrap();
    }
    child.wait_with_output().expect("wait for seqpovm")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_str(out)).expect("stdout is JSON")
}

#[test]
fn scheme_emits_a_consumable_set() {
    let scheme = run(&["scheme", "--omega", "0,0.3", "--dphi", "0"], None, &[]);
    assert!(scheme.status.success());
    let set = json(&scheme);
    assert_eq!(set["dim"], 2);
    assert_eq!(set["operators"].as_array().unwrap().len(), 2);

    let validate = run(&["validate"], Some(&stdout_str(&scheme)), &[]);
    assert_eq!(validate.status.code(), Some(0));
    let report = json(&validate);
    assert_eq!(report["completeness_pass"], true);
}

#[test]
fn validate_exit_codes() {
    // Nilpotent operator: numeric failure, report names normality.
    let nilpotent = r#"{"dim":2,"operators":[[[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]]}"#;
    let out = run(&["validate"], Some(nilpotent), &[]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["normality_pass"], false);

    // Truncated JSON: structural failure.
    let out = run(&["validate"], Some(r#"{"dim":2,"operators":[[["#), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr carries an error object");
    assert_eq!(err["error"]["kind"], "structural");

    // Unknown flag: usage error.
    let out = run(&["validate", "--nonsense"], None, &[]);
    assert_eq!(out.status.code(), Some(2));

    // Ragged operator rows: rejected by the parser.
    let ragged = r#"{"dim":2,"operators":[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0]]]]}"#;
    let out = run(&["validate"], Some(ragged), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bosonic_parity_pipeline_matches_born_weights() {
    let set = run(
        &["bosonic", "--N", "1", "--truncation", "8", "--dphi", "0"],
        None,
        &[],
    );
    assert!(set.status.success());

    // (|0> + |1>)/sqrt(2): half even, half odd.
    let h = 0.7071067811865476f64;
    let state = format!(
        "[[{h},0.0],[{h},0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]"
    );
    let sim = run(
        &[
            "simulate", "--state", &state, "--m", "2", "--shots", "1000", "--seed", "11",
        ],
        Some(&stdout_str(&set)),
        &[],
    );
    assert!(
        sim.status.success(),
        "{}",
        String::from_utf8_lossy(&sim.stderr)
    );
    let report = json(&sim);
    let p0 = report["empirical_probs"][0].as_f64().unwrap();
    let three_sigma = 3.0 * (0.25f64 / 1000.0).sqrt();
    assert!((p0 - 0.5).abs() <= three_sigma, "p0 = {p0}");
    assert_eq!(report["aborted"], 0);
}

#[test]
fn scheme_typicality_pipeline_reports_the_separation_bound() {
    let set = run(&["scheme", "--omega", "0,0.3", "--dphi", "0"], None, &[]);
    let typ = run(
        &[
            "typicality",
            "--m",
            "500",
            "--eta",
            "0.5",
            "--delta",
            "0.02",
        ],
        Some(&stdout_str(&set)),
        &[],
    );
    assert!(typ.status.success());
    let report = json(&typ);
    // Signature (0,1) contributes no width; the bound collapses to
    // 2 ln 2 / tan^2(0.3).
    let expected_bound = 2.0 * 2.0f64.ln() * (1.0 / 0.3f64.tan()).powi(2);
    let bound = report["separation_bound"].as_f64().unwrap();
    assert!((bound - expected_bound).abs() < 1e-9);
    assert_eq!(report["m_min"], expected_bound.floor() as u64 + 1);
    let w00 = report["weights"][0][0].as_f64().unwrap();
    assert!((w00 - 1.0).abs() < 1e-9);
}

#[test]
fn channel_reports_gap_and_classification() {
    let set = run(&["scheme", "--omega", "0,0.3", "--dphi", "0"], None, &[]);
    let out = run(&["channel", "--m", "50"], Some(&stdout_str(&set)), &[]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["m"], 50);
    let gap = report["gap"].as_f64().unwrap();
    assert!((gap - 0.3f64.cos()).abs() < 1e-12);
    let dist = report["distance_to_asymptote"].as_f64().unwrap();
    assert!((dist - 0.3f64.cos().powi(50)).abs() < 1e-12);
    assert_eq!(
        report["classification"]["fixed"].as_array().unwrap().len(),
        2
    );
    assert_eq!(
        report["classification"]["decaying"]
            .as_array()
            .unwrap()
            .len(),
        2
    );

    // A single unitary has no spectral gap; the field is null.
    let unitary = r#"{"dim":2,"operators":[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,1.0]]]]}"#;
    let out = run(&["channel", "--m", "3"], Some(unitary), &[]);
    assert!(out.status.success());
    assert!(json(&out)["gap"].is_null());
}

#[test]
fn decompose_reports_modular_groups() {
    let set = run(&["bosonic", "--N", "2", "--truncation", "8"], None, &[]);
    let out = run(&["decompose"], Some(&stdout_str(&set)), &[]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["s"], 2);
    assert_eq!(report["groups"][0], serde_json::json!([0, 2, 4, 6]));
    assert_eq!(report["groups"][1], serde_json::json!([1, 3, 5, 7]));
    assert_eq!(report["validation"]["completeness_pass"], true);
}

#[test]
fn simulation_output_is_deterministic_across_worker_counts() {
    let set = stdout_str(&run(
        &["scheme", "--omega", "0,0.3", "--dphi", "0"],
        None,
        &[],
    ));
    let args = [
        "simulate",
        "--state",
        "[[[0.3,0.0],[0.0,0.0]],[[0.0,0.0],[0.7,0.0]]]",
        "--m",
        "200",
        "--shots",
        "300",
        "--seed",
        "42",
    ];
    let single = run(&args, Some(&set), &[("SEQPOVM_THREADS", "1")]);
    let multi = run(&args, Some(&set), &[("SEQPOVM_THREADS", "3")]);
    let free = run(&args, Some(&set), &[]);
    assert!(single.status.success());
    assert_eq!(single.stdout, multi.stdout);
    assert_eq!(single.stdout, free.stdout);

    let bad = run(&args, Some(&set), &[("SEQPOVM_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn csv_outputs_are_written() {
    let dir = std::env::temp_dir().join(format!("seqpovm-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let grid_path = dir.join("grid.csv");
    let traj_path = dir.join("traj.csv");

    let set = stdout_str(&run(
        &["scheme", "--omega", "0,0.3", "--dphi", "0"],
        None,
        &[],
    ));
    let typ = run(
        &[
            "typicality",
            "--m",
            "20",
            "--eta",
            "0.5",
            "--delta",
            "0.05",
            "--csv",
            grid_path.to_str().unwrap(),
        ],
        Some(&set),
        &[],
    );
    assert!(typ.status.success());
    let grid = std::fs::read_to_string(&grid_path).unwrap();
    let mut lines = grid.lines();
    assert_eq!(
        lines.next().unwrap(),
        "count_0,count_1,neighborhood,weight_0,weight_1"
    );
    assert_eq!(grid.lines().count(), 22); // header + 21 grid points

    let sim = run(
        &[
            "simulate",
            "--state",
            "[[[0.3,0.0],[0.0,0.0]],[[0.0,0.0],[0.7,0.0]]]",
            "--m",
            "10",
            "--shots",
            "5",
            "--seed",
            "3",
            "--csv",
            traj_path.to_str().unwrap(),
        ],
        Some(&set),
        &[],
    );
    assert!(sim.status.success());
    let traj = std::fs::read_to_string(&traj_path).unwrap();
    assert!(traj.starts_with("shot,outcomes,count_0,count_1,group,margin,log_likelihood,fidelity"));
    assert_eq!(traj.lines().count(), 6);
    // Outcome strings have one digit per round.
    let first = traj.lines().nth(1).unwrap();
    assert_eq!(first.split(',').nth(1).unwrap().len(), 10);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bosonic_defaults_follow_the_prescriptions() {
    // Default truncation 8N and prescribed dphi; N=2 spectrum steps by pi/2.
    let set = run(&["bosonic", "--N", "2"], None, &[]);
    assert!(set.status.success());
    let parsed = json(&set);
    assert_eq!(parsed["dim"], 16);

    let decomposed = run(&["decompose"], Some(&stdout_str(&set)), &[]);
    let report = json(&decomposed);
    assert_eq!(report["s"], 2);

    // Too small a truncation is a structural error.
    let small = run(&["bosonic", "--N", "3", "--truncation", "4"], None, &[]);
    assert_eq!(small.status.code(), Some(2));
}
