use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vofde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vofde"))
        .args(args)
        .output()
        .expect("spawn vofde")
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn list_prints_every_scenario() {
    let out = vofde(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in vofde::reference::names() {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn scenario_trace_has_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let out = vofde(&[
        "scenario",
        "--name",
        "ex4",
        "--h",
        "1e-3",
        "--out",
        out_dir(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,u,udot,uddot,alpha"));
    assert_eq!(lines.count(), 1001);
}

#[test]
fn trace_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = vofde(&[
            "scenario",
            "--name",
            "ex2iii_b",
            "--h",
            "1e-2",
            "--stability",
            "--out",
            out_dir(d.path()),
        ]);
        assert!(out.status.success());
    }
    for file in ["trace.csv", "stability.json"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn stability_report_for_variable_order_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = vofde(&[
        "scenario",
        "--name",
        "ex2iii_d",
        "--h",
        "1e-3",
        "--stability",
        "--out",
        out_dir(dir.path()),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("stability.json")).unwrap())
            .unwrap();
    assert!(report["max_rho"].as_f64().unwrap() <= 1.0);
    assert_eq!(report["satisfied"], true);
    assert_eq!(report["rho"].as_array().unwrap().len(), 5000);

    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,u,udot,uddot,alpha,rho"));
    assert!(lines.next().unwrap().ends_with(','));
    assert!(!lines.next().unwrap().ends_with(','));
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = vofde(&[
        "scenario",
        "--name",
        "ex1ii",
        "--h",
        "1e-3",
        "--convergence",
        "0.004,0.002,0.001",
        "--out",
        out_dir(dir.path()),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let errors: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(rows[2][1], "1000");
    assert_eq!(rows[0][3], "");
    assert!(rows[2][3].parse::<f64>().unwrap() > 1.5);
}

#[test]
fn state_dependent_stability_exits_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = vofde(&[
        "scenario",
        "--name",
        "ex3iii",
        "--h",
        "1e-2",
        "--stability",
        "--out",
        out_dir(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("stability.json")).unwrap())
            .unwrap();
    assert_eq!(report["trace_conditional"], true);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"scenario": "ex4", "h": -1, "outputs": ["trace"], "out_path": "x"}"#,
    )
    .unwrap();
    assert_eq!(
        vofde(&["run", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        vofde(&[
            "scenario",
            "--name",
            "nope",
            "--h",
            "0.1",
            "--out",
            out_dir(dir.path())
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(vofde(&["bogus"]).status.code(), Some(2));
    // no ground truth for a convergence table
    let out = vofde(&[
        "scenario",
        "--name",
        "ex2iii_c",
        "--h",
        "0.01",
        "--convergence",
        "0.01",
        "--out",
        out_dir(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_names_the_node() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let body = serde_json::json!({
        "problem": {
            "a1": 1.0, "a2": 1.0, "a3": 4.0,
            "order": {"form": "polynomial", "params": {"coeffs": [0.5, 1.0]}},
            "u0": 1.0, "v0": 0.0, "t_total": 1.0
        },
        "h": 0.01,
        "outputs": ["trace"],
        "out_path": dir.path().join("out"),
    });
    fs::write(&cfg, body.to_string()).unwrap();
    let out = vofde(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("node 50"), "{err}");
    // the partial trace up to the failing node is kept
    let csv = fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn inline_config_matches_registered_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let body = serde_json::json!({
        "problem": {
            "a1": 1.0, "a2": 0.2, "a3": 1.0,
            "forcing": {"form": "scenario", "params": {"name": "ex4", "field": "forcing"}},
            "order": {"form": "exp_decay", "params": {"d": 1.0, "k": 1.0}},
            "nonlinear": {"form": "cubic", "params": {"k": 1.0}},
            "u0": 0.0, "v0": 0.0, "t_total": 1.0
        },
        "h": 0.01,
        "outputs": ["trace"],
        "out_path": dir.path().join("inline"),
    });
    fs::write(&cfg, body.to_string()).unwrap();
    assert!(vofde(&["run", "--config", cfg.to_str().unwrap()])
        .status
        .success());
    let reg = dir.path().join("registered");
    assert!(vofde(&[
        "scenario",
        "--name",
        "ex4",
        "--h",
        "0.01",
        "--out",
        reg.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(
        fs::read(dir.path().join("inline/trace.csv")).unwrap(),
        fs::read(reg.join("trace.csv")).unwrap()
    );
}
