use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_archinf");

const ZERO: &str = r#"{"family": "zero", "params": {"omega": 1.0, "mu": 0.0},
    "bounds": {"omega": [0.05, 5.0], "mu": [-1.0, 1.0]}}"#;

const GEXP: &str = r#"{
    "family": "gexp", "m": 1,
    "params": {"omega": 0.2, "mu": 0.0, "e": [0.5], "d": 0.7},
    "bounds": {"omega": [0.01, 2.0], "mu": [-1.0, 1.0], "e": [[0.05, 3.0]], "d": [0.1, 3.0]},
    "innovation": {"gamma": 0.5},
    "n_w": 2000
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_zero_family_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "zero.json", ZERO);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["simulate", "--model", s(&model), "--T", "5", "--seed", "7", "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,y");
    assert_eq!(lines.len(), 6);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.csv");
    run(&["simulate", "--model", s(&model), "--T", "5", "--seed", "8", "--out", s(&c)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn missing_omega_names_the_field() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "bad.json", &GEXP.replace("\"omega\": 0.2, ", ""));
    let out = dir.path().join("x.csv");
    let o = run(&["simulate", "--model", s(&model), "--T", "5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.omega"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn explosive_simulation_overflows() {
    let dir = TempDir::new().unwrap();
    let model = write(
        &dir,
        "garch.json",
        r#"{"family": "garch", "m": 1, "n": 1, "allow_nonstationary": true,
            "params": {"omega": 1.0, "mu": 0.0, "a": [3.0], "b": [0.5]}, "n_w": 500}"#,
    );
    let out = dir.path().join("x.csv");
    let o = run(&["simulate", "--model", s(&model), "--T", "20000", "--burn", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let strict = write(&dir, "strict.json", &std::fs::read_to_string(&model).unwrap().replace("true", "false"));
    let o = run(&["simulate", "--model", s(&strict), "--T", "20", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_round_trip_recovers_truth() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "gexp.json", GEXP);
    let data = dir.path().join("y.csv");
    let o = run(&["simulate", "--model", s(&model), "--T", "3000", "--seed", "11", "--out", s(&data)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("fit.json");
    let o = run(&["fit", "--model", s(&model), "--data", s(&data), "--out", s(&out), "--starts", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = std::fs::read(&out).unwrap();
    let doc: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(doc["n_obs"], 3000);
    assert_eq!(doc["diagnostics"]["converged"], true);
    assert_eq!(doc["diagnostics"]["clt_safe"], true);
    assert_eq!(doc["covariance"].as_array().unwrap().len(), 16);
    let truth = [0.2, 0.0, 0.5, 0.7];
    for (i, t) in truth.iter().enumerate() {
        let est = doc["theta_hat"][i].as_f64().unwrap();
        let se = doc["std_errors"][i].as_f64().unwrap();
        let ci = &doc["ci"][i];
        assert!(ci[0].as_f64().unwrap() < est && est < ci[1].as_f64().unwrap());
        assert!((est - t).abs() < 4.0 * se, "coordinate {i}: {est} vs {t} (se {se})");
    }
    run(&["fit", "--model", s(&model), "--data", s(&data), "--out", s(&out), "--starts", "2"]);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn fit_rejects_short_series() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "gexp.json", GEXP);
    let data = write(&dir, "y.csv", "t,y\n1,0.1\n2,-0.3\n3,0.2\n");
    let out = dir.path().join("fit.json");
    let o = run(&["fit", "--model", s(&model), "--data", s(&data), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn fit_reports_negative_figarch_weights() {
    let dir = TempDir::new().unwrap();
    let model = write(
        &dir,
        "figarch.json",
        r#"{"family": "figarch", "m": 1, "n": 1,
            "params": {"omega": 0.2, "mu": 0.0, "a": [0.05], "b": [0.9], "d": 0.2},
            "bounds": {"omega": [0.01, 2.0], "mu": [-1.0, 1.0], "a": [[0.04, 0.06]], "b": [[0.85, 0.95]], "d": [0.15, 0.25]}}"#,
    );
    let data = write(&dir, "y.csv", &(1..=200).fold("t,y\n".to_string(), |acc, t| {
        acc + &format!("{t},{}\n", ((t * 37 % 17) as f64 - 8.0) / 8.0)
    }));
    let out = dir.path().join("fit.json");
    let o = run(&["fit", "--model", s(&model), "--data", s(&data), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("PositivityError"), "{}", stderr(&o));
}

fn check_rows(stdout: &[u8]) -> Vec<Vec<String>> {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "rho\tmoment_factor\tweight_sum\tvalue\ttail_bound\tverdict");
    lines.map(|l| l.split('\t').map(String::from).collect()).collect()
}

#[test]
fn check_reproduces_moment_condition_examples() {
    let dir = TempDir::new().unwrap();
    let figarch = write(
        &dir,
        "figarch.json",
        r#"{"family": "figarch", "params": {"omega": 0.2, "mu": 0.0, "d": 0.45}, "innovation": {"gamma": 0.5}}"#,
    );
    let o = run(&["check", "--model", s(&figarch), "--rho-grid", "0.5:0.99:0.01", "--nw", "100000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = check_rows(&o.stdout);
    assert_eq!(rows.len(), 50);
    for row in &rows {
        let rho: f64 = row[0].parse().unwrap();
        let expected = if rho * 1.45 <= 1.0 { "divergent-sum" } else { "no" };
        assert_eq!(row[5], expected, "rho {rho}");
    }

    let gexp = write(&dir, "gexp.json", GEXP);
    let o = run(&["check", "--model", s(&gexp), "--rho-grid", "0.95:0.95:0.01"]);
    let rows = check_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][5], "yes");
    let value: f64 = rows[0][3].parse().unwrap();
    assert!((value - 0.377).abs() < 5e-4, "{value}");

    for grid in ["0:0.5:0.1", "0.5:1.0:0.1", "0.5:1.2:0.1"] {
        let o = run(&["check", "--model", s(&gexp), "--rho-grid", grid]);
        assert_eq!(o.status.code(), Some(2), "{grid}");
    }
}

fn weights_csv(dir: &TempDir, model: &str, n: &str, derivs: &str) -> Vec<Vec<String>> {
    let m = write(dir, "w.json", model);
    let o = run(&["weights", "--model", s(&m), "--n", n, "--derivs", derivs]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    String::from_utf8(o.stdout).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn weights_examples() {
    let dir = TempDir::new().unwrap();
    let rows = weights_csv(&dir, r#"{"family": "gexp", "m": 1, "params": {"omega": 1, "mu": 0, "e": [0.5], "d": 1}}"#, "1", "1");
    assert_eq!(rows[0], ["j", "psi", "d_e1", "d_d"]);
    assert!((num(&rows[1][1]) - 0.5 * (-1f64).exp()).abs() < 1e-15);
    assert!((num(&rows[1][2]) - (-1f64).exp()).abs() < 1e-15);

    let rows = weights_csv(&dir, r#"{"family": "ghyp", "m": 1, "params": {"omega": 1, "mu": 0, "e": [0.5], "d": 1}}"#, "1", "0");
    assert_eq!(rows[0], ["j", "psi"]);
    assert!((num(&rows[1][1]) - 0.125).abs() < 1e-15);

    let rows = weights_csv(&dir, r#"{"family": "fgarch", "m": 1, "params": {"omega": 1, "mu": 0, "a": [1.0], "d": 0.5}}"#, "2", "2");
    assert_eq!(rows[0], ["j", "psi", "d_a1", "d_d", "d2_a1_a1", "d2_a1_d", "d2_d_d"]);
    assert!((num(&rows[1][1]) - 0.5).abs() < 1e-15);
    assert!((num(&rows[2][1]) - 0.125).abs() < 1e-15);
    // psi_2 = a d (1 - d) / 2: d/da = 0.125, d/dd = 0
    assert!((num(&rows[2][2]) - 0.125).abs() < 1e-15);
    assert!(num(&rows[2][3]).abs() < 1e-15);
}

#[test]
fn weights_writes_file_when_asked() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "g.json", GEXP);
    let out = dir.path().join("w.csv");
    let o = run(&["weights", "--model", s(&m), "--n", "10", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 11);
}

fn mc_config(dir: &TempDir, replications: usize) -> PathBuf {
    let text = format!(
        r#"{{"model": {ZERO}, "t_list": [500, 1000], "replications": {replications}, "seed": 3, "n_starts": 1}}"#
    );
    write(dir, "mc.json", &text)
}

#[test]
fn mc_smoke_and_determinism() {
    let dir = TempDir::new().unwrap();
    let cfg = mc_config(&dir, 50);
    let outs: Vec<PathBuf> = ["a.json", "b.json", "c.json"].iter().map(|n| dir.path().join(n)).collect();
    for (out, threads) in outs.iter().zip(["1", "1", "2"]) {
        let o = run(&["mc", "--config", s(&cfg), "--out", s(out), "--threads", threads]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let first = std::fs::read(&outs[0]).unwrap();
    assert_eq!(first, std::fs::read(&outs[1]).unwrap());
    assert_eq!(first, std::fs::read(&outs[2]).unwrap());
    let doc: Value = serde_json::from_slice(&first).unwrap();
    let per_t = doc["per_t"].as_array().unwrap();
    assert_eq!(per_t.len(), 2);
    for report in per_t {
        for c in report["coordinates"].as_array().unwrap() {
            let cov = c["coverage"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&cov));
            assert!(c["coverage_mcse"].as_f64().unwrap() >= 0.0);
        }
    }
}

#[test]
fn mc_rejects_too_few_replications() {
    let dir = TempDir::new().unwrap();
    let cfg = mc_config(&dir, 10);
    let out = dir.path().join("r.json");
    let o = run(&["mc", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn help_and_unknown_flags() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["fit", "--help"]).status.code(), Some(0));
    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["nope"]).status.code(), Some(2));
}
