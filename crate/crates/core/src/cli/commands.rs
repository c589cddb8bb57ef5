use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use super::io::{fmt_f64, read_series, write_atomic};
use super::model_file::ModelFile;
use super::{CliError, EXIT_NONCONVERGENCE, EXIT_SINGULAR};
use crate::error::Error;
use crate::estimator::{self, FitOptions};
use crate::inference::sandwich;
use crate::montecarlo::{run_mc, MCConfig};
use crate::process::{rho_grid, simulate_path, MomentChecker, SimConfig};
use crate::weights::weight_set;

pub fn simulate(model: &Path, t_len: usize, burn: Option<usize>, seed: u64, out: &Path) -> Result<i32, CliError> {
    let mf = ModelFile::from_path(model)?;
    if t_len == 0 {
        return Err(CliError::config("--T must be at least 1"));
    }
    let mut cfg = SimConfig::new(mf.spec.clone(), mf.theta.clone(), mf.shape, t_len, mf.n_w, seed);
    cfg.burn_in = burn;
    cfg.allow_nonstationary = mf.allow_nonstationary;
    let path = simulate_path(&cfg, false)?;
    let mut text = String::with_capacity(32 * t_len + 8);
    text.push_str("t,y\n");
    for (i, y) in path.y.iter().enumerate() {
        let _ = writeln!(text, "{},{}", i + 1, fmt_f64(*y));
    }
    write_atomic(out, text.as_bytes())?;
    Ok(0)
}

pub fn fit(model: &Path, data: &Path, level: f64, out: &Path, starts: usize, seed: u64) -> Result<i32, CliError> {
    let mf = ModelFile::from_path(model)?;
    let bounds = mf.require_bounds()?.clone();
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::config(format!("--level {level} must lie in (0, 1)")));
    }
    if starts == 0 {
        return Err(CliError::config("--starts must be positive"));
    }
    let y = read_series(data)?;
    let opts = FitOptions { n_starts: starts, seed, parallel: false, ..FitOptions::default() };
    let f = estimator::fit(&y, &mf.spec, &bounds, &opts)?;
    let names = mf.spec.param_names();
    let mut doc = json!({
        "family": mf.spec.family.name(),
        "param_names": names,
        "n_obs": y.len(),
        "theta_hat": f.theta_hat.as_slice(),
        "qll": f.qll_min,
        "level": level,
    });
    let mut diagnostics = json!({
        "converged": f.converged,
        "iterations": f.iterations,
        "projected_grad_norm": f.projected_grad_norm,
        "boundary_flags": f.boundary_flags,
    });
    let code = match sandwich(&f, y.len(), level) {
        Ok(inf) => {
            doc["std_errors"] = json!(inf.std_errors);
            doc["ci"] = json!(inf.ci.iter().map(|(a, b)| [*a, *b]).collect::<Vec<_>>());
            doc["covariance"] = json!(inf.covariance.transpose().as_slice());
            diagnostics["clt_safe"] = json!(inf.clt_safe);
            diagnostics["condition_number"] = json!(inf.condition_number);
            diagnostics["hessian_eigenvalues"] = json!(inf.hessian_eigenvalues);
            diagnostics["warnings"] = json!(inf.warnings);
            if f.converged {
                0
            } else {
                EXIT_NONCONVERGENCE
            }
        }
        Err(Error::SingularHessian { eigenvalues }) => {
            for k in ["std_errors", "ci", "covariance"] {
                doc[k] = Value::Null;
            }
            diagnostics["clt_safe"] = json!(crate::inference::clt_safe(&mf.spec, f.theta_hat.as_slice()));
            diagnostics["condition_number"] = Value::Null;
            diagnostics["hessian_eigenvalues"] = json!(eigenvalues);
            diagnostics["warnings"] = json!([{"kind": "singular-hessian"}]);
            EXIT_SINGULAR
        }
        Err(e) => return Err(e.into()),
    };
    doc["diagnostics"] = diagnostics;
    write_json(out, &doc)?;
    if code == EXIT_NONCONVERGENCE {
        eprintln!("warning: optimizer did not converge (projected gradient {:e})", f.projected_grad_norm);
    } else if code == EXIT_SINGULAR {
        eprintln!("error: SingularHessian at the estimate; no intervals emitted");
    }
    Ok(code)
}

pub fn check(model: &Path, grid: &str, nw: usize) -> Result<i32, CliError> {
    let mf = ModelFile::from_path(model)?;
    let parts: Vec<&str> = grid.split(':').collect();
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::config(format!("--rho-grid: `{s}` is not a number")));
    let [lo, hi, step] = parts.as_slice() else {
        return Err(CliError::config("--rho-grid must be LO:HI:STEP"));
    };
    let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
    if !(lo > 0.0 && hi < 1.0) {
        return Err(CliError::config(format!("--rho-grid {grid} must lie inside (0, 1)")));
    }
    if nw == 0 {
        return Err(CliError::config("--nw must be positive"));
    }
    let rhos = rho_grid(lo, hi, step)?;
    let checker = MomentChecker::new(&mf.spec, mf.theta.zeta(), mf.shape, nw)?;
    let mut text = String::from("rho\tmoment_factor\tweight_sum\tvalue\ttail_bound\tverdict\n");
    for rho in rhos {
        let mc = checker.evaluate(rho)?;
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}",
            rho,
            fmt_f64(mc.moment_factor),
            fmt_f64(mc.weight_sum),
            fmt_f64(mc.value),
            fmt_f64(mc.tail_bound),
            mc.verdict.as_str()
        );
    }
    print!("{text}");
    Ok(0)
}

pub fn weights(model: &Path, n: usize, derivs: u8, out: Option<&Path>) -> Result<i32, CliError> {
    let mf = ModelFile::from_path(model)?;
    if n == 0 {
        return Err(CliError::config("--n must be at least 1"));
    }
    let set = weight_set(&mf.spec, mf.theta.zeta(), n, derivs)?;
    let names = mf.spec.zeta_names();
    let r = set.r;
    let mut header = vec!["j".to_string(), "psi".to_string()];
    if derivs >= 1 {
        header.extend(names.iter().map(|p| format!("d_{p}")));
    }
    if derivs >= 2 {
        for p in 0..r {
            for q in p..r {
                header.push(format!("d2_{}_{}", names[p], names[q]));
            }
        }
    }
    let mut text = header.join(",");
    text.push('\n');
    for j in 0..n {
        let mut row = vec![(j + 1).to_string(), fmt_f64(set.psi[j])];
        if derivs >= 1 {
            row.extend(set.d1[j * r..(j + 1) * r].iter().map(|v| fmt_f64(*v)));
        }
        if derivs >= 2 {
            let h = &set.d2[j * r * r..(j + 1) * r * r];
            for p in 0..r {
                for q in p..r {
                    row.push(fmt_f64(h[p * r + q]));
                }
            }
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    match out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(0)
}

/// Reads an MC config:
/// `{"model": {...} | "model_path": "...", "t_list": [...], "replications": R,
///   "seed": 0, "level": 0.95, "burn_in": B, "n_w": N, "n_starts": 5}`.
pub fn parse_mc_config(path: &Path) -> Result<MCConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::config(format!("config: {e}")))?;
    let root = v.as_object().ok_or_else(|| CliError::config("config must be an object"))?;
    let mf = match (root.get("model"), root.get("model_path")) {
        (Some(m), _) => ModelFile::from_value(m).map_err(|e| CliError::config(format!("model.{}", e.message)))?,
        (None, Some(Value::String(p))) => {
            let base = path.parent().unwrap_or(Path::new("."));
            ModelFile::from_path(&base.join(p))?
        }
        _ => return Err(CliError::config("config needs `model` or `model_path`")),
    };
    let bounds = mf.require_bounds()?.clone();
    let count = |key: &str| -> Result<Option<u64>, CliError> {
        match root.get(key) {
            None => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| CliError::config(format!("{key}: must be a non-negative integer"))),
        }
    };
    let t_list = match root.get("t_list") {
        Some(Value::Array(a)) => a
            .iter()
            .enumerate()
            .map(|(i, v)| v.as_u64().map(|x| x as usize).ok_or_else(|| CliError::config(format!("t_list[{i}]: must be an integer"))))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(CliError::config("t_list: missing or not an array")),
    };
    let replications = count("replications")?.ok_or_else(|| CliError::config("replications: missing"))? as usize;
    let level = match root.get("level") {
        None => 0.95,
        Some(v) => v.as_f64().ok_or_else(|| CliError::config("level: must be a number"))?,
    };
    Ok(MCConfig {
        spec: mf.spec,
        theta0: mf.theta,
        shape: mf.shape,
        t_list,
        replications,
        burn_in: count("burn_in")?.map(|b| b as usize),
        n_w: count("n_w")?.map_or(mf.n_w, |n| n as usize),
        seed: count("seed")?.unwrap_or(0),
        level,
        bounds,
        n_starts: count("n_starts")?.map_or(5, |n| n as usize),
    })
}

pub fn mc(config: &Path, out: &Path, threads: Option<usize>) -> Result<i32, CliError> {
    let cfg = parse_mc_config(config)?;
    cfg.validate()?;
    let report = match threads {
        Some(0) => return Err(CliError::config("--threads must be positive")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
            .install(|| run_mc(&cfg))?,
        None => run_mc(&cfg)?,
    };
    write_json(out, &serde_json::to_value(&report).map_err(|e| CliError::config(e.to_string()))?)?;
    Ok(0)
}

fn write_json(out: &Path, doc: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| CliError::config(e.to_string()))?;
    text.push('\n');
    write_atomic(out, text.as_bytes())
}
