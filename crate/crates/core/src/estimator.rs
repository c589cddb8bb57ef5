//! Box-constrained minimization of the truncated pseudo-likelihood.
//!
//! Projected quasi-Newton: variables pinned at a bound with the gradient
//! pointing outward are held fixed; the rest take a Newton step with the
//! analytic Hessian when it is safely positive definite, otherwise a step
//! scaled by half the score outer product (which matches the Hessian under
//! Gaussian innovations), then BFGS, then steepest descent. Steps are
//! projected back onto the box and backtracked (Armijo).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::likelihood::{EvalLevel, Evaluation, Likelihood, LikelihoodOptions};
use crate::params::{ParamBounds, ParamVector};
use crate::weights::ModelSpec;

const BOUNDARY_FRACTION: f64 = 1e-6;
const TIE_TOL: f64 = 1e-10;
const ARMIJO_C1: f64 = 1e-4;
const HESSIAN_EIG_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Sup-norm of the projected gradient.
    pub grad_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    pub n_starts: usize,
    /// Start perturbation as a fraction of each box width.
    pub start_jitter: f64,
    pub seed: u64,
    /// Use the analytic Hessian for Newton steps when positive definite.
    pub analytic_hessian: bool,
    /// Run starts on the rayon pool.
    pub parallel: bool,
    pub likelihood: LikelihoodOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            step_tol: 1e-10,
            max_iter: 500,
            n_starts: 5,
            start_jitter: 0.25,
            seed: 0,
            analytic_hessian: true,
            parallel: true,
            likelihood: LikelihoodOptions::default(),
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0 && self.step_tol > 0.0 && self.start_jitter > 0.0)
            || self.max_iter == 0
            || self.n_starts == 0
        {
            return Err(Error::Domain("fit options must all be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: ParamVector,
    pub qll_min: f64,
    pub projected_grad_norm: f64,
    pub hessian: DMatrix<f64>,
    pub outer: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub boundary_flags: Vec<bool>,
    pub n_obs: usize,
    pub bounds: ParamBounds,
    pub spec: ModelSpec,
    /// Q at each start point and at its local minimum, in start order.
    pub starts: Vec<StartOutcome>,
}

impl FitResult {
    pub fn any_boundary(&self) -> bool {
        self.boundary_flags.iter().any(|b| *b)
    }
}

#[derive(Debug, Clone)]
pub struct StartOutcome {
    pub start: Vec<f64>,
    pub qll_start: f64,
    pub qll_end: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
struct LocalMin {
    theta: Vec<f64>,
    qll: f64,
    converged: bool,
    iterations: usize,
    qll_start: f64,
    start: Vec<f64>,
}

/// Sup-norm of x - P(x - g).
pub fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &ParamBounds) -> f64 {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (&xi, &gi))| (xi - (xi - gi).clamp(bounds.lower[i], bounds.upper[i])).abs())
        .fold(0.0, f64::max)
}

pub fn boundary_flags(x: &[f64], bounds: &ParamBounds) -> Vec<bool> {
    (0..x.len())
        .map(|i| {
            let tol = BOUNDARY_FRACTION * bounds.width(i);
            x[i] - bounds.lower[i] <= tol || bounds.upper[i] - x[i] <= tol
        })
        .collect()
}

/// Start points: the box center, then jittered copies kept 1% inside the box.
pub fn start_points(bounds: &ParamBounds, n_starts: usize, jitter: f64, seed: u64) -> Vec<Vec<f64>> {
    let center = bounds.center();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![center.clone()];
    for _ in 1..n_starts {
        let p: Vec<f64> = center
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let w = bounds.width(i);
                let v = c + rng.random_range(-1.0..1.0) * jitter * w;
                v.clamp(bounds.lower[i] + 0.01 * w, bounds.upper[i] - 0.01 * w)
            })
            .collect();
        out.push(p);
    }
    out
}

pub fn fit(y: &[f64], spec: &ModelSpec, bounds: &ParamBounds, opts: &FitOptions) -> Result<FitResult> {
    let starts = start_points(bounds, opts.n_starts, opts.start_jitter, opts.seed);
    fit_from_starts(y, spec, bounds, opts, &starts)
}

/// [`fit`] with caller-supplied start points.
pub fn fit_from_starts(
    y: &[f64],
    spec: &ModelSpec,
    bounds: &ParamBounds,
    opts: &FitOptions,
    starts: &[Vec<f64>],
) -> Result<FitResult> {
    spec.validate()?;
    bounds.validate_for(spec)?;
    opts.validate()?;
    let k = spec.r() + 2;
    if y.len() < k {
        return Err(Error::Precondition(format!("T = {} < r + 2 = {k}", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }
    let lik = Likelihood::new(spec, y).with_options(opts.likelihood);

    let run = |s: &Vec<f64>| minimize(&lik, bounds, s, opts);
    let results: Vec<Result<LocalMin>> = if opts.parallel {
        starts.par_iter().map(run).collect()
    } else {
        starts.iter().map(run).collect()
    };

    let mut first_err = None;
    let mut locals = Vec::new();
    for r in results {
        match r {
            Ok(l) => locals.push(l),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if locals.is_empty() {
        return Err(first_err.unwrap_or_else(|| Error::Domain("no start points".into())));
    }

    let best_q = locals.iter().map(|l| l.qll).fold(f64::INFINITY, f64::min);
    let best = locals
        .iter()
        .filter(|l| l.qll <= best_q + TIE_TOL)
        .min_by(|a, b| lex_cmp(&a.theta, &b.theta))
        .expect("at least one candidate")
        .clone();

    let ev = lik.evaluate(&best.theta, EvalLevel::Hessian)?;
    let pg = projected_gradient_norm(&best.theta, ev.score.as_slice(), bounds);
    Ok(FitResult {
        boundary_flags: boundary_flags(&best.theta, bounds),
        theta_hat: ParamVector::from_vec(best.theta.clone())?,
        qll_min: ev.qll,
        projected_grad_norm: pg,
        hessian: ev.hessian.unwrap(),
        outer: ev.outer.unwrap(),
        converged: best.converged && pg <= opts.grad_tol,
        iterations: best.iterations,
        n_obs: y.len(),
        bounds: bounds.clone(),
        spec: spec.clone(),
        starts: locals
            .iter()
            .map(|l| StartOutcome {
                start: l.start.clone(),
                qll_start: l.qll_start,
                qll_end: l.qll,
                converged: l.converged,
                iterations: l.iterations,
            })
            .collect(),
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn minimize(lik: &Likelihood<'_>, bounds: &ParamBounds, start: &[f64], opts: &FitOptions) -> Result<LocalMin> {
    let k = start.len();
    let level = if opts.analytic_hessian { EvalLevel::Hessian } else { EvalLevel::Gradient };
    let mut x = start.to_vec();
    bounds.project(&mut x);
    let start_point = x.clone();
    let mut ev: Evaluation = lik.evaluate(&x, level)?;
    let qll_start = ev.qll;
    let mut bfgs = DMatrix::<f64>::identity(k, k);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=opts.max_iter {
        iterations = iter;
        let g = ev.score.clone();
        if projected_gradient_norm(&x, g.as_slice(), bounds) <= opts.grad_tol {
            converged = true;
            iterations = iter - 1;
            break;
        }
        let free: Vec<usize> = (0..k)
            .filter(|&i| {
                let w = bounds.width(i) * 1e-12;
                !((x[i] <= bounds.lower[i] + w && g[i] > 0.0) || (x[i] >= bounds.upper[i] - w && g[i] < 0.0))
            })
            .collect();

        let mut candidates: Vec<(DVector<f64>, bool)> = Vec::with_capacity(3);
        if let Some(h) = ev.hessian.as_ref() {
            if let Some(p) = newton_direction(h, &g, &free, HESSIAN_EIG_FLOOR) {
                candidates.push((p, true));
            }
        }
        if let Some(gm) = ev.outer.as_ref() {
            if let Some(p) = newton_direction(&(gm * 0.5), &g, &free, 0.0) {
                candidates.push((p, false));
            }
        }
        if let Some(p) = newton_direction(&bfgs, &g, &free, 0.0) {
            candidates.push((p, false));
        }
        let mut sd = DVector::zeros(k);
        for &i in &free {
            sd[i] = -g[i];
        }
        candidates.push((sd, false));

        let mut accepted = None;
        for (p, newton) in candidates {
            if g.dot(&p) >= 0.0 {
                continue;
            }
            if let Some(step) = line_search(lik, bounds, &x, ev.qll, &g, &p, newton) {
                accepted = Some(step);
                break;
            }
        }
        let Some((x_new, _)) = accepted else {
            break;
        };

        let ev_new = lik.evaluate(&x_new, level)?;
        let s = DVector::from_iterator(k, x_new.iter().zip(&x).map(|(a, b)| a - b));
        let yv = &ev_new.score - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            let bs = &bfgs * &s;
            let sbs = s.dot(&bs);
            bfgs += &yv * yv.transpose() / sy - &bs * bs.transpose() / sbs;
        }
        let small = s.iter().zip(&x).all(|(d, xi)| d.abs() <= opts.step_tol * (1.0 + xi.abs()));
        x = x_new;
        ev = ev_new;
        if small {
            converged = projected_gradient_norm(&x, ev.score.as_slice(), bounds) <= opts.grad_tol;
            break;
        }
    }
    if !converged {
        converged = projected_gradient_norm(&x, ev.score.as_slice(), bounds) <= opts.grad_tol;
    }
    Ok(LocalMin { theta: x, qll: ev.qll, converged, iterations, qll_start, start: start_point })
}

/// Solves H_FF p_F = -g_F on the free coordinates. `None` if the block is not
/// positive definite with minimum eigenvalue above `floor`.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>, free: &[usize], floor: f64) -> Option<DVector<f64>> {
    let nf = free.len();
    if nf == 0 {
        return None;
    }
    let sub = DMatrix::from_fn(nf, nf, |a, b| h[(free[a], free[b])]);
    if floor > 0.0 {
        let eig = sub.clone().symmetric_eigenvalues();
        if eig.iter().any(|e| !(*e > floor)) {
            return None;
        }
    }
    let chol = sub.cholesky()?;
    let rhs = DVector::from_iterator(nf, free.iter().map(|&i| -g[i]));
    let sol = chol.solve(&rhs);
    let mut p = DVector::zeros(g.len());
    for (a, &i) in free.iter().enumerate() {
        p[i] = sol[a];
    }
    p.iter().all(|v| v.is_finite()).then_some(p)
}

/// Backtracking along the projected path. Points where the weights are
/// invalid (e.g. non-positive) count as infeasible.
fn line_search(
    lik: &Likelihood<'_>,
    bounds: &ParamBounds,
    x: &[f64],
    f: f64,
    g: &DVector<f64>,
    p: &DVector<f64>,
    newton: bool,
) -> Option<(Vec<f64>, f64)> {
    let mut alpha = 1.0;
    for attempt in 0..60 {
        let mut xn: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + alpha * b).collect();
        bounds.project(&mut xn);
        if xn.iter().zip(x).all(|(a, b)| a == b) {
            return None;
        }
        if let Ok(fn_) = lik.qll(&xn) {
            let dec: f64 = xn.iter().zip(x).zip(g.iter()).map(|((a, b), gi)| (a - b) * gi).sum();
            // full Newton steps near the optimum may sit inside rounding noise
            let slack = if newton && attempt == 0 { 16.0 * f64::EPSILON * f.abs().max(1.0) } else { 0.0 };
            if fn_.is_finite() && fn_ <= f + ARMIJO_C1 * dec + slack {
                return Some((xn, fn_));
            }
        }
        alpha *= 0.5;
    }
    None
}
