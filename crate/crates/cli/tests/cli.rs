use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn helmwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helmwave"))
        .args(args)
        .env("HELMWAVE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Rows of a field CSV as (x.., t, u).
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const STRING: &str = r#"{"dimension": 1, "shape": {"interval": {"a": 0, "b": 1}}}"#;

fn solve_config(equation: &str, phi: &str, times: &str) -> String {
    format!(
        r#"{{"geometry": {STRING},
            "equation": {equation},
            "eigensolver": {{"lambda_range": [1, 20]}},
            "initial": {{"phi": "{phi}"}},
            "output": {{"times": {times}, "points": [[0.25], [0.5]]}}}}"#
    )
}

#[test]
fn interval_spectrum_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(r#"{{"geometry": {STRING}, "eigensolver": {{"lambda_range": [1, 10]}}}}"#),
    );
    let out = dir.path().join("spec.json");
    let o = helmwave(&[
        "eigs",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    for k in ["3.14159", "6.28319", "9.42478"] {
        assert!(table.contains(k), "{table}");
    }
    let records: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 3);
}

#[test]
fn disk_fundamental_mode() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"geometry": {"dimension": 2, "shape": {"disk": {"radius": 1.0, "boundary_nodes": 32}}},
            "eigensolver": {"lambda_range": [2.0, 3.0], "samples": 40}}"#,
    );
    let o = helmwave(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = stderr(&o).lines().nth(1).unwrap().to_string();
    let lambda: f64 = first.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((lambda - 2.404826).abs() < 1e-3, "{first}");
}

#[test]
fn empty_range_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(r#"{{"geometry": {STRING}, "eigensolver": {{"lambda_range": [3.5, 6.0], "samples": 50}}}}"#),
    );
    let o = helmwave(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("error: empty-spectrum"));
}

#[test]
fn misspelled_bc_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"geometry": {"dimension": 1, "shape": {"interval": {"a": 0, "b": 1, "bc": "dirichlit"}}}}"#,
    );
    let o = helmwave(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().next().unwrap(), "error: parse: geometry.shape.bc");
    assert!(err.contains("dirichlit"));
}

#[test]
fn unknown_keys_and_bad_json_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "a.json",
        &format!(r#"{{"geometry": {STRING}, "eigensolvr": {{}}}}"#),
    );
    let o = helmwave(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().next().unwrap(), "error: parse: eigensolvr");

    let cfg = write(
        dir.path(),
        "b.json",
        &format!(r#"{{"geometry": {STRING}, "eigensolver": {{"range": [1, 2]}}}}"#),
    );
    let o = helmwave(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stderr(&o).lines().next().unwrap(), "error: parse: eigensolver.range");

    let cfg = write(dir.path(), "c.json", "{\n  \"geometry\": ,\n}");
    let o = helmwave(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = helmwave(&["eigs", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn string_wave_reverses_at_t_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &solve_config(r#"{"family": "wave", "c": 1.0}"#, "sin(pi*x1)", "[0, 1]"),
    );
    let out = dir.path().join("u.csv");
    let o = helmwave(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["energy_captured"].as_f64().unwrap() > 0.999);
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,t,u");
    let r = rows(&text);
    let at = |x: f64, t: f64| r.iter().find(|row| row[0] == x && row[1] == t).unwrap()[2];
    assert!((at(0.5, 0.0) - 1.0).abs() < 1e-4);
    assert!((at(0.5, 1.0) + 1.0).abs() < 1e-4, "{}", at(0.5, 1.0));
}

#[test]
fn diffusion_decays_monotonically() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &solve_config(
            r#"{"family": "diffusion", "h": 1.0}"#,
            "sin(pi*x1)",
            "[0, 0.05, 0.1, 0.2]",
        ),
    );
    let o = helmwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    let mid: Vec<f64> = r.iter().filter(|row| row[0] == 0.5).map(|row| row[2]).collect();
    assert_eq!(mid.len(), 4);
    assert!(mid.windows(2).all(|w| w[1] < w[0]), "{mid:?}");
    let exact = (-std::f64::consts::PI.powi(2) * 0.2).exp();
    assert!((mid[3] - exact).abs() < 1e-4);
}

#[test]
fn zero_data_gives_zero_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &solve_config(r#"{"family": "wave", "c": 1.0}"#, "0", "[0, 0.5, 2]"),
    );
    let o = helmwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(rows(&stdout(&o)).iter().all(|row| row[2] == 0.0));
}

#[test]
fn sampled_initial_data() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("x1,u\n");
    for i in 0..=40 {
        let x = i as f64 / 40.0;
        csv.push_str(&format!("{x},{}\n", (std::f64::consts::PI * x).sin()));
    }
    write(dir.path(), "phi.csv", &csv);
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"geometry": {STRING},
                "equation": {{"family": "wave", "c": 1.0}},
                "eigensolver": {{"lambda_range": [1, 20]}},
                "initial": {{"phi_samples": "phi.csv"}},
                "output": {{"times": [1], "points": [[0.5]]}}}}"#
        ),
    );
    let o = helmwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let u = rows(&stdout(&o))[0][2];
    assert!((u + 1.0).abs() < 1e-3, "{u}");
}

#[test]
fn dimension_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"geometry": {STRING},
                "equation": {{"family": "wave", "c": 1.0}},
                "initial": {{"phi": "sin(pi*x1)"}},
                "output": {{"times": [0], "points": [[0.5, 0.5]]}}}}"#
        ),
    );
    let o = helmwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: dimension-mismatch"), "{}", stderr(&o));

    let cfg = write(
        dir.path(),
        "d.json",
        &solve_config(r#"{"family": "wave", "c": 1.0}"#, "x2", "[0]"),
    );
    let o = helmwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).lines().next().unwrap().contains("initial.phi"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn invalid_parameters_exit_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"family": "wave", "c": -1.0}"#, "equation.c"),
        (r#"{"family": "wave"}"#, "equation.c"),
        (r#"{"family": "wave", "c": 1.0, "h": 2.0}"#, "equation.h"),
        (r#"{"family": "heat", "h": 1.0}"#, "equation.family"),
    ];
    for (eq, field) in cases {
        let cfg = write(dir.path(), "c.json", &solve_config(eq, "sin(pi*x1)", "[0]"));
        let o = helmwave(&["solve", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{eq}: {}", stderr(&o));
        assert_eq!(stderr(&o).lines().next().unwrap(), format!("error: parameter: {field}"));
    }
    let cfg = write(
        dir.path(),
        "n.json",
        &solve_config(r#"{"family": "wave", "c": 1.0}"#, "x1", "[-1]"),
    );
    let o = helmwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stderr(&o).lines().next().unwrap(), "error: parameter: output.times");
}

#[test]
fn solve_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"geometry": {"dimension": 2, "shape": {"rectangle": {"lower": [0, 0], "upper": [1, 1], "boundary_nodes": 40}}},
            "equation": {"family": "damped_wave", "c": 1.0, "damping": 0.3},
            "eigensolver": {"lambda_range": [4.0, 5.0], "samples": 30},
            "initial": {"phi": "sin(pi*x1)*sin(pi*x2)"},
            "output": {"times": [0, 0.5], "grid": {"lower": [0.1, 0.1], "upper": [0.9, 0.9], "counts": [3, 3]}}}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o1 = helmwave(&["solve", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert!(o1.status.success(), "{}", stderr(&o1));
    let o2 = Command::new(env!("CARGO_BIN_EXE_helmwave"))
        .args(["solve", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])
        .env("HELMWAVE_THREADS", "1")
        .output()
        .unwrap();
    assert!(o2.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(rows(&std::fs::read_to_string(&a).unwrap()).len(), 18);
}

#[test]
fn expand_direct_and_collocation() {
    let dir = TempDir::new().unwrap();
    let direct = write(
        dir.path(),
        "d.json",
        &format!(
            r#"{{"geometry": {STRING}, "expansion": {{"scales": 4, "lattice": 8, "function": "exp(-10*(x1-0.5)^2)"}}}}"#
        ),
    );
    let out = dir.path().join("series.json");
    let o = helmwave(&[
        "expand",
        "--config",
        direct.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let series: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(series["coeffs"].as_array().unwrap().len(), 4);

    let colloc = write(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"geometry": {STRING}, "expansion": {{"scales": 3, "lattice": 6, "method": "collocation", "function": "exp(-10*(x1-0.5)^2)"}}}}"#
        ),
    );
    let o = helmwave(&[
        "expand",
        "--config",
        colloc.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["fit_residual"].as_f64().unwrap() < 1e-2, "{report}");
}

#[test]
fn transform_writes_field_and_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"transform": {"function": "exp(-16*(x1-0.5)^2)", "support": [-0.5, 1.5],
                          "lambda_range": [0.1, 40], "lambda_count": 128,
                          "check_points": [[0.25], [0.5], [0.75]]}}"#,
    );
    let out = dir.path().join("F.csv");
    let o = helmwave(&[
        "transform",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((report["cg"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    assert!(report["round_trip_error"].as_f64().unwrap() < 0.05, "{report}");
    assert!(report["helmholtz_residual"].as_f64().unwrap() > 0.0);
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "lambda,xi1,F");
    assert_eq!(text.lines().count(), 1 + 128 * 256);
}

#[test]
fn validate_suite_argument() {
    let o = helmwave(&["validate", "--suite", "quick"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().next().unwrap(), "error: parameter: suite");

    let o = helmwave(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: usage: -"));
}

#[test]
fn bad_thread_count_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_helmwave"))
        .args(["validate", "--suite", "fast"])
        .env("HELMWAVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().next().unwrap(), "error: parameter: HELMWAVE_THREADS");
}
