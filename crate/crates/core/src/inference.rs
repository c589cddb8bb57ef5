//! Sandwich covariance, confidence intervals and Monte Carlo estimates of the
//! population matrices G_0 and H_0.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::FitResult;
use crate::innovations::GedShape;
use crate::likelihood::{EvalLevel, Likelihood};
use crate::params::ParamVector;
use crate::process::{simulate_path, SimConfig};
use crate::stats::{derive_seed, normal_quantile};
use crate::weights::ModelSpec;

const EIG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InferenceWarning {
    /// Estimates within 1e-6 of a box edge; interiority fails.
    Boundary { coordinates: Vec<usize> },
    NotConverged,
    /// Hyperbolic decay with d <= 1/2.
    CltUnsafe { d: f64 },
}

#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub covariance: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    pub level: f64,
    pub ci: Vec<(f64, f64)>,
    pub condition_number: f64,
    pub hessian_eigenvalues: Vec<f64>,
    pub clt_safe: bool,
    pub warnings: Vec<InferenceWarning>,
}

/// H^{-1} G H^{-1} / T through the eigendecomposition of H. Fails when the
/// smallest eigenvalue is not above 1e-10 times the largest.
pub fn sandwich_covariance(h: &DMatrix<f64>, g: &DMatrix<f64>, t_len: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if t_len == 0 {
        return Err(Error::Domain("T must be positive".into()));
    }
    let hs = (h + h.transpose()) * 0.5;
    let eig = hs.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !(min > EIG_FLOOR * max) || ev.iter().any(|v| !v.is_finite()) {
        ev.sort_by(f64::total_cmp);
        return Err(Error::SingularHessian { eigenvalues: ev });
    }
    let v = &eig.eigenvectors;
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    let h_inv = v * inv_diag * v.transpose();
    let mut cov = &h_inv * g * &h_inv / t_len as f64;
    cov = (&cov + cov.transpose()) * 0.5;
    ev.sort_by(f64::total_cmp);
    Ok((cov, ev))
}

pub fn sandwich(fit: &FitResult, t_len: usize, level: f64) -> Result<InferenceResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} must lie in (0, 1)")));
    }
    let (covariance, ev) = sandwich_covariance(&fit.hessian, &fit.outer, t_len)?;
    let theta = fit.theta_hat.as_slice();
    let z = normal_quantile(0.5 + 0.5 * level);
    let std_errors: Vec<f64> = (0..theta.len()).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    let ci = theta.iter().zip(&std_errors).map(|(t, s)| (t - z * s, t + z * s)).collect();

    let mut warnings = Vec::new();
    if fit.any_boundary() {
        let coordinates = fit.boundary_flags.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect();
        warnings.push(InferenceWarning::Boundary { coordinates });
    }
    if !fit.converged {
        warnings.push(InferenceWarning::NotConverged);
    }
    let clt_safe = clt_safe(&fit.spec, theta);
    if !clt_safe {
        let d = fit.spec.d_index().map(|i| theta[i + 2]).unwrap_or(f64::NAN);
        warnings.push(InferenceWarning::CltUnsafe { d });
    }
    Ok(InferenceResult {
        covariance,
        std_errors,
        level,
        ci,
        condition_number: ev[ev.len() - 1] / ev[0],
        hessian_eigenvalues: ev,
        clt_safe,
        warnings,
    })
}

/// True unless the family decays hyperbolically with d <= 1/2.
pub fn clt_safe(spec: &ModelSpec, theta: &[f64]) -> bool {
    if !spec.family.is_hyperbolic() {
        return true;
    }
    spec.d_index().is_none_or(|i| theta[i + 2] > 0.5)
}

/// Per-path averages at theta_0 over the kept window.
#[derive(Debug, Clone)]
pub struct PathMatrices {
    /// E tau tau'
    pub m: DMatrix<f64>,
    /// E (tau / sigma) e_2'
    pub n: DMatrix<f64>,
    /// E (1 / sigma^2) e_2 e_2'
    pub p: DMatrix<f64>,
    /// Average of u_t u_t'.
    pub g_direct: DMatrix<f64>,
    /// Average of the Hessian of q_t.
    pub h_direct: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct PopulationMatrices {
    pub m: DMatrix<f64>,
    pub n: DMatrix<f64>,
    pub p: DMatrix<f64>,
    /// (2 + kappa_4) M + 2 kappa_3 (N + N') + 4 P
    pub g0: DMatrix<f64>,
    /// M + 2 P
    pub h0: DMatrix<f64>,
    pub g_direct: DMatrix<f64>,
    pub h_direct: DMatrix<f64>,
    pub kappa3: f64,
    pub kappa4: f64,
    pub paths: Vec<PathMatrices>,
}

pub fn assemble_g0(m: &DMatrix<f64>, n: &DMatrix<f64>, p: &DMatrix<f64>, kappa3: f64, kappa4: f64) -> DMatrix<f64> {
    m * (2.0 + kappa4) + (n + n.transpose()) * (2.0 * kappa3) + p * 4.0
}

pub fn assemble_h0(m: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    m + p * 2.0
}

/// Drops the mu row and column.
pub fn known_mu(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().remove_row(1).remove_column(1)
}

impl PopulationMatrices {
    /// Element-wise Monte Carlo standard error of the path average of `f`.
    pub fn mcse(&self, f: impl Fn(&PathMatrices) -> DMatrix<f64>) -> DMatrix<f64> {
        let vals: Vec<DMatrix<f64>> = self.paths.iter().map(f).collect();
        let r = vals.len() as f64;
        let (nr, nc) = vals[0].shape();
        let mean = vals.iter().fold(DMatrix::zeros(nr, nc), |a, b| a + b) / r;
        let var = vals
            .iter()
            .fold(DMatrix::zeros(nr, nc), |a, b| a + (b - &mean).map(|v| v * v))
            / (r - 1.0).max(1.0);
        var.map(|v| (v / r).sqrt())
    }

    pub fn g0_path(&self, pm: &PathMatrices) -> DMatrix<f64> {
        assemble_g0(&pm.m, &pm.n, &pm.p, self.kappa3, self.kappa4)
    }

    pub fn h0_path(&self, pm: &PathMatrices) -> DMatrix<f64> {
        assemble_h0(&pm.m, &pm.p)
    }
}

/// Single-path averages of tau tau', (tau / sigma) e_2', e_2 e_2' / sigma^2,
/// u u' and the Hessian over t >= `from`.
pub fn path_matrices(spec: &ModelSpec, theta0: &[f64], y: &[f64], from: usize) -> Result<PathMatrices> {
    let lik = Likelihood::new(spec, y);
    let k = lik.dim();
    let mut m = DMatrix::<f64>::zeros(k, k);
    let mut n = DMatrix::<f64>::zeros(k, k);
    let mut p = DMatrix::<f64>::zeros(k, k);
    let mut count = 0usize;
    lik.for_each_term(theta0, 1, from, |tm| {
        let s2 = tm.sigma2;
        let tau = nalgebra::DVector::from_iterator(k, tm.grad.iter().map(|g| g / s2));
        m.syger(1.0, &tau, &tau, 1.0);
        let sd = s2.sqrt();
        for i in 0..k {
            n[(i, 1)] += tau[i] / sd;
        }
        p[(1, 1)] += 1.0 / s2;
        count += 1;
    })?;
    let c = count.max(1) as f64;
    m.fill_upper_triangle_with_lower_triangle();
    m /= c;
    n /= c;
    p /= c;
    let ev = lik.evaluate_from(theta0, EvalLevel::Hessian, from)?;
    Ok(PathMatrices { m, n, p, g_direct: ev.outer.unwrap(), h_direct: ev.hessian.unwrap() })
}

/// Averages over `reps` simulated paths of length `t_mc` after `burn` presample
/// steps. The presample feeds the truncated variance so it tracks the
/// untruncated one.
pub fn population_matrices(
    spec: &ModelSpec,
    theta0: &ParamVector,
    shape: GedShape,
    t_mc: usize,
    reps: usize,
    seed: u64,
    burn: usize,
) -> Result<PopulationMatrices> {
    if reps < 2 || t_mc < 2 {
        return Err(Error::Domain("need at least 2 replications of length 2".into()));
    }
    theta0.validate(spec)?;
    let paths: Vec<PathMatrices> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let cfg = SimConfig::new(spec.clone(), theta0.clone(), shape, t_mc, burn + t_mc, derive_seed(seed, rep as u64, t_mc as u64))
                .burn_in(burn);
            let path = simulate_path(&cfg, true)?;
            path_matrices(spec, theta0.as_slice(), &path.y, burn)
        })
        .collect::<Result<_>>()?;
    let (kappa3, kappa4) = shape.cumulants();
    let k = theta0.len();
    let avg = |f: &dyn Fn(&PathMatrices) -> &DMatrix<f64>| {
        paths.iter().fold(DMatrix::zeros(k, k), |a, pm| a + f(pm)) / reps as f64
    };
    let m = avg(&|pm| &pm.m);
    let n = avg(&|pm| &pm.n);
    let p = avg(&|pm| &pm.p);
    let g_direct = avg(&|pm| &pm.g_direct);
    let h_direct = avg(&|pm| &pm.h_direct);
    Ok(PopulationMatrices {
        g0: assemble_g0(&m, &n, &p, kappa3, kappa4),
        h0: assemble_h0(&m, &p),
        m,
        n,
        p,
        g_direct,
        h_direct,
        kappa3,
        kappa4,
        paths,
    })
}
