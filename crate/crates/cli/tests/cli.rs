use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

struct Outcome {
    code: i32,
    out: PathBuf,
    stderr: String,
}

fn rsqs(cmd: &str, config: &str, dir: &Path, extra: &[&str], env: &[(&str, &str)]) -> Outcome {
    let cfg = dir.join(format!("{cmd}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out-{cmd}-{}", extra.join("-")));
    let mut c = Command::new(env!("CARGO_BIN_EXE_rsqs"));
    c.arg(cmd).arg("--config").arg(&cfg).arg("--out").arg(&out).args(extra);
    for (k, v) in env {
        c.env(k, v);
    }
    let o = c.output().unwrap();
    Outcome { code: o.status.code().unwrap(), out, stderr: String::from_utf8_lossy(&o.stderr).into_owned() }
}

fn run(cmd: &str, config: Value) -> (Outcome, TempDir) {
    let dir = TempDir::new().unwrap();
    let o = rsqs(cmd, &config.to_string(), dir.path(), &[], &[]);
    (o, dir)
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn cosine_well() -> Value {
    json!({ "shape": { "kind": "cosine", "terms": [
        { "amplitude": 20.0, "wavevector": [0] },
        { "amplitude": 20.0, "wavevector": [1] }
    ] } })
}

fn packet() -> Value {
    json!({ "kind": "gaussian", "center": [0.4], "width": 0.09, "momentum": [1] })
}

#[test]
fn free_plane_wave_matches_analytic_phase() {
    let (o, _d) = run(
        "simulate",
        json!({
            "grid": { "d": 1, "n": 16 },
            "potential": { "shape": { "kind": "zero" } },
            "initial": { "kind": "plane_wave", "mode": [3] },
            "propagator": { "k": 1, "t": 0.7, "planner": { "kind": "fixed", "steps": 5 } }
        }),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let s = read_json(o.out.join("summary.json"));
    assert!(s["phase_error"].as_f64().unwrap() <= 1e-10);
    assert!(s["norm_drift"].as_f64().unwrap() <= 1e-12);
    for f in ["final.snap", "diagnostics.csv", "timing.json"] {
        assert!(o.out.join(f).exists(), "{f}");
    }
}

#[test]
fn tight_tolerance_run_meets_oracle() {
    let (o, _d) = run(
        "simulate",
        json!({
            "grid": { "d": 1, "n": 32 },
            "potential": { "shape": { "kind": "harmonic", "omega_sq": 400.0, "center": [0.5] } },
            "initial": { "kind": "gaussian", "center": [0.45], "width": 0.07 },
            "propagator": { "k": 2, "t": 1.0,
                "planner": { "kind": "adaptive", "eps": 1e-6, "initial_steps": 64, "max_steps": 1048576 } }
        }),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let s = read_json(o.out.join("summary.json"));
    assert!(s["oracle_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn bound_planned_run_meets_its_tolerance() {
    let (o, _d) = run(
        "simulate",
        json!({
            "grid": { "d": 1, "n": 8 },
            "potential": cosine_well(),
            "initial": packet(),
            "propagator": { "k": 2, "t": 0.05, "planner": { "kind": "bound", "eps": 1e-3 } }
        }),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let s = read_json(o.out.join("summary.json"));
    assert!(s["oracle_error"].as_f64().unwrap() <= 1e-3);
    assert!(s["planned_exponentials"].as_u64().unwrap() > 0);
}

#[test]
fn rescaled_run_reports_integrated_norm() {
    let (o, _d) = run(
        "simulate",
        json!({
            "grid": { "d": 1, "n": 16 },
            "potential": {
                "shape": { "kind": "constant", "value": 3.0 },
                "modulation": { "kind": "burst", "floor": 1.0, "peak": 9.0, "center": 0.5, "width": 0.1 }
            },
            "initial": packet(),
            "propagator": { "k": 1, "t": 1.0, "planner": { "kind": "fixed", "steps": 1 },
                "rescaled": { "quad_points": 4097, "slices": 40 } }
        }),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let s = read_json(o.out.join("summary.json"));
    let want = 3.0 * (1.0 + 9.0 * 0.1 * std::f64::consts::PI.sqrt());
    assert!((s["f_max1"].as_f64().unwrap() - want).abs() < 1e-4 * want);
    assert_eq!(s["steps"].as_u64().unwrap(), 40);
}

#[test]
fn config_errors_exit_2_without_outputs() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("simulate", "{ \"grid\": "),
        ("plan", r#"{"g_prime": 1, "eps": 0.1, "k": 1, "t": 1, "colour": "red"}"#),
        ("simulate", r#"{"grid": {"d": 1, "n": 7}, "potential": {"shape": {"kind": "zero"}},
            "initial": {"kind": "plane_wave", "mode": [0]},
            "propagator": {"k": 1, "t": 1, "planner": {"kind": "fixed", "steps": 1}}}"#),
        ("optimize", r#"{"objective": {"kind": "saddle_of_doom"}, "eps": 0.1}"#),
        ("converge", r#"{"state": {"kind": "theta", "beta": 0.1}, "t_max": 0.1, "n_min": 7, "n_max": 9}"#),
    ];
    for (i, (cmd, text)) in cases.iter().enumerate() {
        let o = rsqs(cmd, text, dir.path(), &[&format!("--seed={i}")], &[]);
        assert_eq!(o.code, 2, "{cmd} {text}: {}", o.stderr);
        assert!(!o.out.exists());
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_rsqs"))
        .args(["plan", "--config", "/nonexistent.json", "--out"])
        .arg(dir.path().join("never"))
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));
    assert!(!dir.path().join("never").exists());
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "g_prime": 1.0, "eps": 0.1, "k": 1, "t": 1.0 }).to_string();
    let o = rsqs("plan", &cfg, dir.path(), &[], &[("RSQS_THREADS", "0")]);
    assert_eq!(o.code, 2);
    let o = rsqs("plan", &cfg, dir.path(), &["--seed=3"], &[("RSQS_THREADS", "2")]);
    assert_eq!(o.code, 0, "{}", o.stderr);
}

#[test]
fn plan_reproduces_budget_arithmetic() {
    let (o, _d) = run("plan", json!({ "g_prime": 1.0, "eps": 1e-3, "k": 1, "t": 1.0 }));
    assert_eq!(o.code, 0, "{}", o.stderr);
    let p = read_json(o.out.join("plan.json"));
    assert_eq!(p["n_closed_form"], 8);
    assert_eq!(p["n_selected"], 10);

    let (o, _d) = run("plan", json!({ "g_prime": 1.0, "eps": 0.01, "k": 1, "t": 1.0, "h_norm": 1.0 }));
    let p = read_json(o.out.join("plan.json"));
    assert_eq!(p["exponentials"], 4000);
    assert_eq!(p["steps"], 1334);

    let (o, _d) = run("plan", json!({ "g_prime": 1.0, "eps": 2.0, "k": 1, "t": 0.0 }));
    let p = read_json(o.out.join("plan.json"));
    assert_eq!(p["n_selected"], 6);
    assert_eq!(p["exponentials"], 0);
    assert_eq!(p["steps"], 0);
}

#[test]
fn plan_reports_l1_ratio_of_a_burst() {
    let (o, _d) = run(
        "plan",
        json!({ "g_prime": 1.0, "eps": 1e-2, "k": 1, "t": 1.0, "potential": {
            "shape": { "kind": "constant", "value": 1.0 },
            "modulation": { "kind": "burst", "floor": 1.0, "peak": 99.0, "center": 0.5, "width": 0.02 }
        } }),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let p = read_json(o.out.join("plan.json"));
    let want = (1.0 + 99.0 * 0.02 * std::f64::consts::PI.sqrt()) / 100.0;
    assert!((p["l1_ratio"].as_f64().unwrap() - want).abs() < 1e-3 * want);
}

#[test]
fn converge_sweep_stays_under_bound() {
    let (o, _d) = run(
        "converge",
        json!({ "state": { "kind": "theta", "beta": 0.1 }, "t_max": 0.1, "samples": 8, "n_min": 6, "n_max": 32 }),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = fs::read_to_string(o.out.join("converge.csv")).unwrap();
    let errs: Vec<f64> = column(&csv, "measured_error").iter().map(|v| v.parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
    assert!(column(&csv, "within_bound").iter().any(|v| v == "true"));
    assert!(column(&csv, "within_bound").iter().all(|v| v != "false"));
}

#[test]
fn constant_state_has_zero_bound() {
    let (o, _d) = run(
        "converge",
        json!({ "state": { "kind": "fourier", "coefficients": [[0, 1.0, 0.0]] },
                "t_max": 0.5, "samples": 4, "n_min": 6, "n_max": 12 }),
    );
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = fs::read_to_string(o.out.join("converge.csv")).unwrap();
    assert!(column(&csv, "paper_bound").iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    assert!(column(&csv, "measured_error").iter().all(|v| v.parse::<f64>().unwrap() <= 1e-13));
}

#[test]
fn step_data_breaks_the_smooth_bound() {
    let (o, _d) = run(
        "converge",
        json!({ "state": { "kind": "step" }, "t_max": 0.01, "samples": 4, "n_min": 16, "n_max": 24, "g_prime": 1.0 }),
    );
    assert_eq!(o.code, 4, "{}", o.stderr);
    let csv = fs::read_to_string(o.out.join("converge.csv")).unwrap();
    assert!(column(&csv, "within_bound").iter().any(|v| v == "false"));
}

#[test]
fn order_check_passes_and_misprint_fails() {
    let base = json!({ "grid": { "d": 1, "n": 16 }, "potential": cosine_well(), "initial": packet(), "t": 0.5 });
    let (o, _d) = run("order-check", base.clone());
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = fs::read_to_string(o.out.join("order.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);

    let mut local = base.clone();
    local["mode"] = json!("local");
    let (o, _d) = run("order-check", local);
    assert_eq!(o.code, 0, "{}", o.stderr);

    let mut bad = base;
    bad["coefficients"] = json!("misprinted");
    bad["orders"] = json!([{ "k": 2 }]);
    let (o, _d) = run("order-check", bad);
    assert_eq!(o.code, 4);
    let csv = fs::read_to_string(o.out.join("order.csv")).unwrap();
    let slope: f64 = column(&csv, "fitted_slope")[0].parse().unwrap();
    assert!(slope < 4.0);
}

#[test]
fn potential_bench_checks_accuracy() {
    let (o, _d) = run("potential-bench", json!({ "d": 3, "delta": 0.05, "etas": [2, 400], "rng_seed": 5 }));
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = fs::read_to_string(o.out.join("bench.csv")).unwrap();
    let rel: Vec<f64> = column(&csv, "rel_err").iter().map(|v| v.parse().unwrap()).collect();
    assert!(rel[0] <= 1e-15);
    let timing = fs::read_to_string(o.out.join("bench_timing.csv")).unwrap();
    assert_eq!(timing.lines().count(), 3);

    let (o, _d) = run("potential-bench", json!({ "d": 3, "delta": 0.05, "etas": [400], "target": 0.0, "theta": 2.0 }));
    assert_eq!(o.code, 4);
}

#[test]
fn potential_bench_reads_particle_files() {
    let dir = TempDir::new().unwrap();
    let particles = dir.path().join("p.csv");
    fs::write(&particles, "0.1,0.2,1.0\n0.9,0.8,-1.0\n0.5,0.5,2.0\n").unwrap();
    let cfg = json!({ "d": 2, "delta": 0.1, "particles": particles }).to_string();
    let o = rsqs("potential-bench", &cfg, dir.path(), &[], &[]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = fs::read_to_string(o.out.join("bench.csv")).unwrap();
    let direct: f64 = column(&csv, "direct_value")[0].parse().unwrap();
    let pair = |a: (f64, f64), b: (f64, f64)| 1.0 / ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2) + 0.01).sqrt();
    let want = -pair((0.1, 0.2), (0.9, 0.8)) + 2.0 * pair((0.1, 0.2), (0.5, 0.5)) - 2.0 * pair((0.9, 0.8), (0.5, 0.5));
    assert!((direct - want).abs() < 1e-12);

    fs::write(&particles, "0.1,0.2\n").unwrap();
    assert_eq!(rsqs("potential-bench", &cfg, dir.path(), &["--seed=1"], &[]).code, 2);
}

#[test]
fn optimizer_outcomes() {
    let (o, _d) = run("optimize", json!({ "objective": { "kind": "double_well", "dim": 2 }, "eps": 0.01, "seeds": 6 }));
    assert_eq!(o.code, 0, "{}", o.stderr);
    let s = read_json(o.out.join("summary.json"));
    assert!(s["success_rate"].as_f64().unwrap() >= 2.0 / 3.0);

    let (o, _d) = run("optimize", json!({ "objective": { "kind": "convex_bowl", "dim": 3 }, "eps": 0.001, "seeds": 3 }));
    assert_eq!(o.code, 0, "{}", o.stderr);
    let s = read_json(o.out.join("summary.json"));
    assert_eq!(s["success_rate"], 1.0);
    assert_eq!(s["total_sim_calls"], 0);

    let (o, _d) = run(
        "optimize",
        json!({ "objective": { "kind": "double_well", "dim": 2 }, "eps": 0.01, "seeds": 3, "max_iters": 1 }),
    );
    assert_eq!(o.code, 4);
    assert!(o.out.join("outcomes.csv").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "objective": { "kind": "double_well", "dim": 3 }, "eps": 0.01, "seeds": 4,
                      "simulation": { "mode": "separable" } })
    .to_string();
    let a = rsqs("optimize", &cfg, dir.path(), &["--seed=11"], &[("RSQS_THREADS", "1")]);
    let b = rsqs("optimize", &cfg, dir.path(), &["--seed", "11"], &[("RSQS_THREADS", "3")]);
    assert_eq!((a.code, b.code), (0, 0));
    for f in ["outcomes.csv", "trace.csv", "calls.csv", "summary.json"] {
        assert_eq!(fs::read(a.out.join(f)).unwrap(), fs::read(b.out.join(f)).unwrap(), "{f}");
    }
    let c = rsqs("optimize", &cfg, dir.path(), &["--seed=12"], &[]);
    assert_ne!(fs::read(a.out.join("calls.csv")).unwrap(), fs::read(c.out.join("calls.csv")).unwrap());
}
