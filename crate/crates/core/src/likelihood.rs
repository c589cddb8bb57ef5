//! Truncated Gaussian pseudo-likelihood
//!
//! Q_T(theta) = T^{-1} sum_t [ x_t^2(mu) / s_t^2(theta) + ln s_t^2(theta) ]
//!
//! with x_t(mu) = y_t - mu and s_t^2 = omega + sum_{j=1}^{t-1} psi_j(zeta) x_{t-j}^2,
//! i.e. the variance built from the observed history only. Score and Hessian
//! are analytic.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::params::ParamVector;
use crate::weights::{self, ModelSpec};

/// s_t^2 from precomputed weights. Lags beyond `psi.len()` are dropped.
pub fn sigma_bar_sq(theta: &ParamVector, y: &[f64], psi: &[f64]) -> Vec<f64> {
    let mu = theta.mu();
    let x2: Vec<f64> = y.iter().map(|v| (v - mu) * (v - mu)).collect();
    (0..y.len())
        .map(|t| {
            let lags = t.min(psi.len());
            let s: f64 = (0..lags).map(|j| psi[j] * x2[t - 1 - j]).sum();
            theta.omega() + s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LikelihoodOptions {
    /// Cap on the number of lags in s_t^2. `None` uses the full history,
    /// minus trailing weights that underflow to exactly zero.
    pub max_lag: Option<usize>,
}

/// Per-observation quantities handed to [`Likelihood::for_each_term`].
pub struct Term<'a> {
    /// 0-based time index.
    pub t: usize,
    pub x: f64,
    pub sigma2: f64,
    /// d s_t^2 / d theta (empty at order 0).
    pub grad: &'a [f64],
    /// d^2 s_t^2 / d theta d theta', row-major (empty below order 2).
    pub hess: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EvalLevel {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub qll: f64,
    /// Average score; empty at `EvalLevel::Value`.
    pub score: DVector<f64>,
    pub hessian: Option<DMatrix<f64>>,
    /// Average outer product of per-observation scores.
    pub outer: Option<DMatrix<f64>>,
}

/// Per-observation scores u_t and their average.
#[derive(Debug, Clone)]
pub struct Score {
    pub per_t: Vec<DVector<f64>>,
    pub mean: DVector<f64>,
}

pub struct Likelihood<'a> {
    spec: &'a ModelSpec,
    y: &'a [f64],
    opts: LikelihoodOptions,
}

impl<'a> Likelihood<'a> {
    pub fn new(spec: &'a ModelSpec, y: &'a [f64]) -> Self {
        Self { spec, y, opts: LikelihoodOptions::default() }
    }

    pub fn with_options(mut self, opts: LikelihoodOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn spec(&self) -> &ModelSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.spec.r() + 2
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if self.y.is_empty() {
            return domain("empty series");
        }
        if theta.len() != self.dim() {
            return domain(format!("theta has length {}, expected {}", theta.len(), self.dim()));
        }
        if !(theta[0] > 0.0) || !theta[0].is_finite() {
            return domain(format!("omega = {} must be positive", theta[0]));
        }
        if !theta[1].is_finite() {
            return domain("mu must be finite");
        }
        Ok(())
    }

    /// Visits s_t^2 and its theta-derivatives up to `order` for t >= `from`.
    pub fn for_each_term(
        &self,
        theta: &[f64],
        order: u8,
        from: usize,
        mut visit: impl FnMut(&Term<'_>),
    ) -> Result<()> {
        self.check_theta(theta)?;
        let t_len = self.y.len();
        let r = self.spec.r();
        let k = r + 2;
        let mut set = weights::weight_set(self.spec, &theta[2..], t_len.saturating_sub(1).max(1), order)?;
        set.trim_zeros();
        let lag_cap = self.opts.max_lag.map_or(set.len(), |m| m.min(set.len()));

        let mu = theta[1];
        let x: Vec<f64> = self.y.iter().map(|v| v - mu).collect();
        let x2: Vec<f64> = x.iter().map(|v| v * v).collect();

        let mut grad = vec![0.0; if order >= 1 { k } else { 0 }];
        let mut hess = vec![0.0; if order >= 2 { k * k } else { 0 }];
        let mut sz = vec![0.0; r];
        let mut smuz = vec![0.0; r];
        let mut szz = vec![0.0; r * r];

        for t in from..t_len {
            let lags = t.min(lag_cap);
            let mut s0 = 0.0;
            match order {
                0 => {
                    for j in 0..lags {
                        s0 += set.psi[j] * x2[t - 1 - j];
                    }
                }
                1 => {
                    let mut smu = 0.0;
                    sz.iter_mut().for_each(|v| *v = 0.0);
                    for j in 0..lags {
                        let xv = x[t - 1 - j];
                        let xx = x2[t - 1 - j];
                        let w = set.psi[j];
                        s0 += w * xx;
                        smu += w * xv;
                        let row = &set.d1[j * r..(j + 1) * r];
                        for (acc, d) in sz.iter_mut().zip(row) {
                            *acc += d * xx;
                        }
                    }
                    grad[0] = 1.0;
                    grad[1] = -2.0 * smu;
                    grad[2..].copy_from_slice(&sz);
                }
                _ => {
                    let (mut smu, mut spsi) = (0.0, 0.0);
                    sz.iter_mut().for_each(|v| *v = 0.0);
                    smuz.iter_mut().for_each(|v| *v = 0.0);
                    szz.iter_mut().for_each(|v| *v = 0.0);
                    for j in 0..lags {
                        let xv = x[t - 1 - j];
                        let xx = x2[t - 1 - j];
                        let w = set.psi[j];
                        s0 += w * xx;
                        smu += w * xv;
                        spsi += w;
                        let row = &set.d1[j * r..(j + 1) * r];
                        for p in 0..r {
                            sz[p] += row[p] * xx;
                            smuz[p] += row[p] * xv;
                        }
                        let h = &set.d2[j * r * r..(j + 1) * r * r];
                        for p in 0..r {
                            for q in p..r {
                                szz[p * r + q] += h[p * r + q] * xx;
                            }
                        }
                    }
                    grad[0] = 1.0;
                    grad[1] = -2.0 * smu;
                    grad[2..].copy_from_slice(&sz);
                    hess.iter_mut().for_each(|v| *v = 0.0);
                    hess[k + 1] = 2.0 * spsi;
                    for p in 0..r {
                        hess[k + 2 + p] = -2.0 * smuz[p];
                        hess[(2 + p) * k + 1] = -2.0 * smuz[p];
                        for q in p..r {
                            let v = szz[p * r + q];
                            hess[(2 + p) * k + 2 + q] = v;
                            hess[(2 + q) * k + 2 + p] = v;
                        }
                    }
                }
            }
            let sigma2 = theta[0] + s0;
            visit(&Term { t, x: x[t], sigma2, grad: &grad, hess: &hess });
        }
        Ok(())
    }

    pub fn sigma_bar_sq(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.y.len());
        self.for_each_term(theta, 0, 0, |tm| out.push(tm.sigma2))?;
        Ok(out)
    }

    pub fn qll(&self, theta: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        self.for_each_term(theta, 0, 0, |tm| acc += tm.x * tm.x / tm.sigma2 + tm.sigma2.ln())?;
        Ok(acc / self.y.len() as f64)
    }

    pub fn score(&self, theta: &[f64]) -> Result<Score> {
        let k = self.dim();
        let mut per_t = Vec::with_capacity(self.y.len());
        let mut mean = DVector::zeros(k);
        self.for_each_term(theta, 1, 0, |tm| {
            let u = point_score(tm);
            mean += &u;
            per_t.push(u);
        })?;
        mean /= self.y.len() as f64;
        Ok(Score { per_t, mean })
    }

    pub fn hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.evaluate(theta, EvalLevel::Hessian)?.hessian.unwrap())
    }

    pub fn outer_product(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.evaluate(theta, EvalLevel::Hessian)?.outer.unwrap())
    }

    pub fn evaluate(&self, theta: &[f64], level: EvalLevel) -> Result<Evaluation> {
        self.evaluate_from(theta, level, 0)
    }

    /// Averages over t >= `from` only; earlier observations still feed s_t^2.
    pub fn evaluate_from(&self, theta: &[f64], level: EvalLevel, from: usize) -> Result<Evaluation> {
        let k = self.dim();
        let order = match level {
            EvalLevel::Value => 0,
            EvalLevel::Gradient => 1,
            EvalLevel::Hessian => 2,
        };
        let mut qll = 0.0;
        let mut score = DVector::zeros(if order >= 1 { k } else { 0 });
        let mut hessian = DMatrix::zeros(k, k);
        let mut outer = DMatrix::zeros(k, k);
        self.for_each_term(theta, order, from, |tm| {
            qll += tm.x * tm.x / tm.sigma2 + tm.sigma2.ln();
            if order >= 1 {
                let u = point_score(tm);
                if order >= 2 {
                    outer.syger(1.0, &u, &u, 1.0);
                    add_point_hessian(&mut hessian, tm);
                }
                score += u;
            }
        })?;
        let count = self.y.len().saturating_sub(from).max(1) as f64;
        qll /= count;
        score /= count;
        let (hessian, outer) = if order >= 2 {
            hessian /= count;
            outer /= count;
            hessian.fill_upper_triangle_with_lower_triangle();
            outer.fill_upper_triangle_with_lower_triangle();
            (Some(hessian), Some(outer))
        } else {
            (None, None)
        };
        Ok(Evaluation { qll, score, hessian, outer })
    }
}

/// u_t = tau_t (1 - chi_t) + nu_t / s_t^2, tau = grad / s^2, chi = x^2 / s^2, nu = -2 x e_2.
pub fn point_score(tm: &Term<'_>) -> DVector<f64> {
    let chi = tm.x * tm.x / tm.sigma2;
    let c = (1.0 - chi) / tm.sigma2;
    let mut u = DVector::from_iterator(tm.grad.len(), tm.grad.iter().map(|g| g * c));
    u[1] -= 2.0 * tm.x / tm.sigma2;
    u
}

/// Accumulates the lower triangle of
/// h_t = (1 - chi) s''/s^2 + (2 chi - 1) tau tau' - (tau nu' + nu tau') / s^2 + 2 e_2 e_2' / s^2.
fn add_point_hessian(acc: &mut DMatrix<f64>, tm: &Term<'_>) {
    let k = tm.grad.len();
    let s2 = tm.sigma2;
    let chi = tm.x * tm.x / s2;
    let a = (1.0 - chi) / s2;
    let b = (2.0 * chi - 1.0) / (s2 * s2);
    let nu_scale = 2.0 * tm.x / (s2 * s2);
    for p in 0..k {
        for q in 0..=p {
            let mut v = a * tm.hess[p * k + q] + b * tm.grad[p] * tm.grad[q];
            if p == 1 {
                v += nu_scale * tm.grad[q];
            }
            if q == 1 {
                v += nu_scale * tm.grad[p];
            }
            acc[(p, q)] += v;
        }
    }
    acc[(1, 1)] += 2.0 / s2;
}
