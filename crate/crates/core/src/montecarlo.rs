//! Replication harness: simulate, fit and build sandwich intervals over a grid
//! of sample sizes, then summarize bias, RMSE, coverage and normality.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{fit, FitOptions};
use crate::inference::sandwich;
use crate::innovations::GedShape;
use crate::likelihood::{EvalLevel, Likelihood};
use crate::params::{ParamBounds, ParamVector};
use crate::process::{find_rho, rho_grid, simulate, MomentCondition, SimConfig};
use crate::stats::{anderson_darling_normal, derive_seed, mean, AD_CRITICAL_1PCT};
use crate::weights::ModelSpec;

pub const MIN_REPLICATIONS: usize = 50;

#[derive(Debug, Clone)]
pub struct MCConfig {
    pub spec: ModelSpec,
    pub theta0: ParamVector,
    pub shape: GedShape,
    pub t_list: Vec<usize>,
    pub replications: usize,
    /// `None` uses the simulator default.
    pub burn_in: Option<usize>,
    /// Weight truncation for simulation and the moment check.
    pub n_w: usize,
    pub seed: u64,
    pub level: f64,
    pub bounds: ParamBounds,
    pub n_starts: usize,
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.theta0.validate(&self.spec)?;
        self.bounds.validate_for(&self.spec)?;
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Domain(format!(
                "replications = {} below the floor of {MIN_REPLICATIONS}",
                self.replications
            )));
        }
        let floor = 10 * (self.spec.r() + 2);
        if self.t_list.is_empty() {
            return Err(Error::Domain("empty T list".into()));
        }
        if let Some(t) = self.t_list.iter().find(|&&t| t < floor) {
            return Err(Error::Domain(format!("T = {t} below 10 (r + 2) = {floor}")));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Domain(format!("level {} must lie in (0, 1)", self.level)));
        }
        if self.n_w == 0 || self.n_starts == 0 {
            return Err(Error::Domain("n_w and n_starts must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one (T, replication) task.
#[derive(Debug, Clone, Serialize)]
pub struct Replication {
    pub t_len: usize,
    pub rep: usize,
    pub seed: u64,
    pub theta_hat: Option<Vec<f64>>,
    pub std_errors: Option<Vec<f64>>,
    pub converged: bool,
    pub boundary: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordinateStats {
    pub name: String,
    pub bias: f64,
    pub bias_mcse: f64,
    pub rmse: f64,
    pub coverage: f64,
    /// Binomial standard error of the coverage at the realized count.
    pub coverage_mcse: f64,
    /// Anderson-Darling statistic of (theta_hat - theta_0) / se against N(0, 1).
    pub ad_statistic: f64,
    pub ad_reject_1pct: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSizeReport {
    pub t: usize,
    pub replications: usize,
    pub converged: usize,
    pub with_inference: usize,
    pub fraction_converged: f64,
    pub fraction_boundary: f64,
    pub coordinates: Vec<CoordinateStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MCReport {
    pub family: String,
    pub param_names: Vec<String>,
    pub theta0: Vec<f64>,
    pub gamma: f64,
    pub replications: usize,
    pub level: f64,
    pub seed: u64,
    /// Smallest satisfied moment condition on the grid 0.01..0.99, if any.
    pub moment_condition: Option<MomentCondition>,
    pub per_t: Vec<SampleSizeReport>,
    #[serde(skip)]
    pub runs: Vec<Replication>,
}

pub fn run_mc(cfg: &MCConfig) -> Result<MCReport> {
    cfg.validate()?;
    let grid = rho_grid(0.01, 0.99, 0.01)?;
    let moment = find_rho(&cfg.spec, cfg.theta0.zeta(), cfg.shape, &grid, cfg.n_w)?;

    let tasks: Vec<(usize, usize)> = cfg
        .t_list
        .iter()
        .flat_map(|&t| (0..cfg.replications).map(move |r| (t, r)))
        .collect();
    let runs: Vec<Replication> = tasks.par_iter().map(|&(t, rep)| replicate(cfg, t, rep)).collect();

    let names = cfg.spec.param_names();
    let per_t = cfg
        .t_list
        .iter()
        .map(|&t| {
            let rs: Vec<&Replication> = runs.iter().filter(|r| r.t_len == t).collect();
            summarize(cfg, t, &rs, &names)
        })
        .collect();
    Ok(MCReport {
        family: cfg.spec.family.name().to_string(),
        param_names: names,
        theta0: cfg.theta0.as_slice().to_vec(),
        gamma: cfg.shape.gamma(),
        replications: cfg.replications,
        level: cfg.level,
        seed: cfg.seed,
        moment_condition: moment,
        per_t,
        runs,
    })
}

fn replicate(cfg: &MCConfig, t: usize, rep: usize) -> Replication {
    let seed = derive_seed(cfg.seed, rep as u64, t as u64);
    let mut out = Replication {
        t_len: t,
        rep,
        seed,
        theta_hat: None,
        std_errors: None,
        converged: false,
        boundary: false,
        error: None,
    };
    let mut sim = SimConfig::new(cfg.spec.clone(), cfg.theta0.clone(), cfg.shape, t, cfg.n_w, seed);
    sim.burn_in = cfg.burn_in;
    let y = match simulate(&sim) {
        Ok(s) => s.values,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let opts = FitOptions {
        n_starts: cfg.n_starts,
        seed: derive_seed(seed, 0, 0),
        parallel: false,
        ..FitOptions::default()
    };
    let f = match fit(&y, &cfg.spec, &cfg.bounds, &opts) {
        Ok(f) => f,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.converged = f.converged;
    out.boundary = f.any_boundary();
    out.theta_hat = Some(f.theta_hat.as_slice().to_vec());
    match sandwich(&f, t, cfg.level) {
        Ok(inf) => out.std_errors = Some(inf.std_errors),
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn summarize(cfg: &MCConfig, t: usize, runs: &[&Replication], names: &[String]) -> SampleSizeReport {
    let total = runs.len();
    let ok: Vec<&&Replication> = runs.iter().filter(|r| r.converged).collect();
    let with_inf: Vec<&&Replication> = ok.iter().copied().filter(|r| r.std_errors.is_some()).collect();
    let boundary = runs.iter().filter(|r| r.boundary).count();
    let theta0 = cfg.theta0.as_slice();
    let z = crate::stats::normal_quantile(0.5 + 0.5 * cfg.level);
    let coordinates = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let errs: Vec<f64> = ok.iter().map(|r| r.theta_hat.as_ref().unwrap()[i] - theta0[i]).collect();
            let n = errs.len() as f64;
            let bias = if errs.is_empty() { f64::NAN } else { mean(&errs) };
            let bias_mcse = if errs.len() < 2 {
                f64::NAN
            } else {
                crate::stats::sample_sd(&errs) / n.sqrt()
            };
            let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
            let std: Vec<f64> = with_inf
                .iter()
                .map(|r| (r.theta_hat.as_ref().unwrap()[i] - theta0[i]) / r.std_errors.as_ref().unwrap()[i])
                .collect();
            let m = std.len() as f64;
            let covered = std.iter().filter(|s| s.abs() <= z).count() as f64;
            let coverage = if std.is_empty() { f64::NAN } else { covered / m };
            let ad = anderson_darling_normal(&std);
            CoordinateStats {
                name: name.clone(),
                bias,
                bias_mcse,
                rmse,
                coverage,
                coverage_mcse: (coverage * (1.0 - coverage) / m).sqrt(),
                ad_statistic: ad,
                ad_reject_1pct: ad > AD_CRITICAL_1PCT,
            }
        })
        .collect();
    SampleSizeReport {
        t,
        replications: total,
        converged: ok.len(),
        with_inference: with_inf.len(),
        fraction_converged: ok.len() as f64 / total as f64,
        fraction_boundary: boundary as f64 / total as f64,
        coordinates,
    }
}

/// Per-replication ||G_T - 2 H_T||_F / ||H_T||_F at theta_0 on simulated
/// paths of length `t_len` after `burn` presample steps.
pub fn information_identity_gaps(
    spec: &ModelSpec,
    theta0: &ParamVector,
    shape: GedShape,
    t_len: usize,
    reps: usize,
    seed: u64,
    burn: usize,
) -> Result<Vec<f64>> {
    theta0.validate(spec)?;
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let cfg = SimConfig::new(spec.clone(), theta0.clone(), shape, t_len, burn + t_len, derive_seed(seed, rep as u64, t_len as u64))
                .burn_in(burn);
            let y = simulate(&cfg)?.values;
            let ev = Likelihood::new(spec, &y).evaluate(theta0.as_slice(), EvalLevel::Hessian)?;
            let h = ev.hessian.unwrap();
            let g = ev.outer.unwrap();
            Ok((&g - &h * 2.0).norm() / h.norm())
        })
        .collect()
}

/// Largest identity gap over replications under Gaussian innovations.
pub fn gaussian_identity_check(spec: &ModelSpec, theta0: &ParamVector, t_len: usize, reps: usize, seed: u64) -> Result<f64> {
    let gaps = information_identity_gaps(spec, theta0, GedShape::GAUSSIAN, t_len, reps, seed, 1000)?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}
