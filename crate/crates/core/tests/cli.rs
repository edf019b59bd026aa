use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shiftheat::cli::{read_grid, RunConfig};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftheat"))
        .args(args)
        .env_remove("SHIFTHEAT_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "p0.json", r#"{"phi": "cos(2*pi*x)"}"#);
    let o = bin(&["validate", "--config", &good]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("-2.000000e0") && text.contains("verdict: pass"), "{text}");

    let bad = write(dir.path(), "bad.json", r#"{"phi": "cos(2*pi*x)", "delta0": 0}"#);
    assert_eq!(bin(&["validate", "--config", &bad]).status.code(), Some(1));
    // the gate applies to every job command unless forced
    assert_eq!(bin(&["traces", "--config", &bad]).status.code(), Some(1));

    let broken = write(dir.path(), "broken.json", r#"{"phi": "#);
    assert_eq!(bin(&["validate", "--config", &broken]).status.code(), Some(3));
    let unknown = write(dir.path(), "unknown.json", r#"{"phi": "0", "gamma": 1}"#);
    assert_eq!(bin(&["validate", "--config", &unknown]).status.code(), Some(3));
    assert_eq!(bin(&["validate", "--config", "/nonexistent/x.json"]).status.code(), Some(3));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn spectrum_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p0.json", r#"{"phi": "cos(2*pi*x)"}"#);
    let o = bin(&["spectrum", "--config", &cfg, "--count", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("nu"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6, "{text}");
    let mut ims: Vec<f64> = rows.iter().map(|r| r[2] / std::f64::consts::PI).collect();
    ims.sort_by(f64::total_cmp);
    for (got, want) in ims.iter().zip([-6.0, -4.0, -2.0, 2.0, 4.0, 6.0]) {
        assert!((got - want).abs() < 1e-8, "{ims:?}");
    }
    assert!(rows.iter().all(|r| r[1].abs() < 1e-8 && r[3] == 2.0));
}

#[test]
fn solve_with_components_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "job.json",
        r#"{"phi": "cos(2*pi*x)", "method": "existence-formula", "x_points": 5,
            "t_values": [0.15, 0.35], "k_segments": 1, "threads": 1}"#,
    );
    let out = dir.path().join("u.csv");
    let o = bin(&["solve", "--config", &cfg, "--out", out.to_str().unwrap(), "--emit-plots"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# method=existence-formula"));
    assert!(text.contains("x,t,u,u1,u2,u3"));
    assert!(out.with_extension("gp").exists());

    let (g, meta) = read_grid(&out).unwrap();
    assert_eq!((g.xs.len(), g.ts.len()), (5, 2));
    assert_eq!(meta["omega"], "0.5");
    // the embedded config reproduces the job
    let embedded = RunConfig::from_json(&meta["config"]).unwrap();
    assert_eq!(embedded.x_points, 5);
    for (j, t) in g.ts.iter().enumerate() {
        for (i, x) in g.xs.iter().enumerate() {
            let want = (-4.0 * std::f64::consts::PI.powi(2) * t).exp() * (2.0 * std::f64::consts::PI * x).cos();
            assert!((g.values[j][i] - want).abs() < 1e-6);
        }
    }
}

#[test]
fn compare_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "job.json",
        r#"{"phi": "sin(2*pi*x)", "x_points": 11, "t_values": [0.05, 0.1]}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(bin(&["solve", "--config", &cfg, "--out", a.to_str().unwrap()]).status.code(), Some(0));
    let o = bin(&["oracle", "--config", &cfg, "--out", b.to_str().unwrap(), "--nx", "100", "--dt", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = bin(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sup = report["sup"].as_f64().unwrap();
    assert!(sup > 0.0 && sup < 1e-3, "{report}");
    assert_eq!(report["slices"].as_array().unwrap().len(), 2);
}

#[test]
fn threads_from_environment() {
    std::env::set_var("SHIFTHEAT_THREADS", "3");
    let cfg = RunConfig::from_json(r#"{"phi": "0", "threads": 2}"#).unwrap();
    assert_eq!(cfg.thread_count(), Some(3));
    std::env::remove_var("SHIFTHEAT_THREADS");
    assert_eq!(cfg.thread_count(), Some(2));
}
