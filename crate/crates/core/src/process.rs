//! Path simulation and the fractional-moment sufficient condition
//! E|e|^{2 rho} sum_j psi_j^rho < 1.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::innovations::GedShape;
use crate::params::ParamVector;
use crate::series::Series;
use crate::weights::{self, Family, ModelSpec, ShapeExponents};

pub const DEFAULT_MOMENT_NW: usize = 1_000_000;
const MAX_DEFAULT_BURN: usize = 100_000;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: ModelSpec,
    pub theta0: ParamVector,
    pub shape: GedShape,
    pub t_len: usize,
    /// Presample steps discarded; `None` means min(10 n_w, 1e5).
    pub burn_in: Option<usize>,
    pub n_w: usize,
    pub seed: u64,
    /// Required when the truncated weights sum to 1 or more.
    pub allow_nonstationary: bool,
}

impl SimConfig {
    pub fn new(spec: ModelSpec, theta0: ParamVector, shape: GedShape, t_len: usize, n_w: usize, seed: u64) -> Self {
        Self { spec, theta0, shape, t_len, burn_in: None, n_w, seed, allow_nonstationary: false }
    }

    pub fn burn_in(mut self, burn: usize) -> Self {
        self.burn_in = Some(burn);
        self
    }

    pub fn effective_burn_in(&self) -> usize {
        self.burn_in.unwrap_or_else(|| (10 * self.n_w).min(MAX_DEFAULT_BURN))
    }
}

/// Simulated returns together with the latent variance path.
#[derive(Debug, Clone)]
pub struct SimPath {
    pub y: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub eps: Vec<f64>,
}

pub fn simulate(cfg: &SimConfig) -> Result<Series> {
    Ok(Series::new(simulate_path(cfg, false)?.y))
}

/// Like [`simulate`] but also returns sigma_t^2 and e_t over the kept window,
/// and with `keep_burn` the presample as well.
pub fn simulate_path(cfg: &SimConfig, keep_burn: bool) -> Result<SimPath> {
    let burn = cfg.effective_burn_in();
    let mut p = simulate_full(cfg)?;
    if keep_burn {
        return Ok(p);
    }
    p.y.drain(..burn);
    p.sigma2.drain(..burn);
    p.eps.drain(..burn);
    Ok(p)
}

fn simulate_full(cfg: &SimConfig) -> Result<SimPath> {
    if cfg.t_len < 1 {
        return domain("sample length T must be at least 1");
    }
    if cfg.n_w < 1 {
        return domain("weight truncation N_w must be at least 1");
    }
    cfg.theta0.validate(&cfg.spec)?;
    let mut set = weights::weight_set(&cfg.spec, cfg.theta0.zeta(), cfg.n_w, 0)?;
    set.trim_zeros();
    let psi = set.psi;
    let total: f64 = psi.iter().sum();
    if total >= 1.0 && !cfg.allow_nonstationary {
        return Err(Error::NonStationary { sum: total });
    }

    let burn = cfg.effective_burn_in();
    let steps = burn + cfg.t_len;
    let omega = cfg.theta0.omega();
    let mu = cfg.theta0.mu();
    let mut sampler = cfg.shape.sampler(cfg.seed);
    let mut x2 = Vec::with_capacity(steps);
    let mut out = SimPath {
        y: Vec::with_capacity(steps),
        sigma2: Vec::with_capacity(steps),
        eps: Vec::with_capacity(steps),
    };
    for t in 0..steps {
        let lags = t.min(psi.len());
        let mut s = 0.0;
        for (j, w) in psi[..lags].iter().enumerate() {
            s += w * x2[t - 1 - j];
        }
        let s2 = omega + s;
        if !s2.is_finite() {
            return Err(Error::Overflow { t: t + 1 });
        }
        let e = sampler.draw();
        let x = s2.sqrt() * e;
        x2.push(x * x);
        out.y.push(mu + x);
        out.sigma2.push(s2);
        out.eps.push(e);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
    DivergentSum,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
            Verdict::DivergentSum => "divergent-sum",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCondition {
    pub rho: f64,
    /// E|e|^{2 rho}
    pub moment_factor: f64,
    /// sum_{j <= N_w} psi_j^rho
    pub weight_sum: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub verdict: Verdict,
}

/// Truncated weights prepared once for evaluating the moment condition over many rho.
pub struct MomentChecker {
    spec: ModelSpec,
    psi: Vec<f64>,
    d: Option<f64>,
    f_max: f64,
    b_radius: f64,
    shape: GedShape,
}

impl MomentChecker {
    pub fn new(spec: &ModelSpec, zeta: &[f64], shape: GedShape, n_w: usize) -> Result<Self> {
        let psi = weights::weights(spec, zeta, n_w)?;
        let d = spec.d_index().map(|i| zeta[i]);
        let f_max = match (&spec.shape, spec.family) {
            (ShapeExponents::Fixed(f), Family::Gexp | Family::Ghyp) => f.iter().copied().fold(0.0, f64::max),
            (ShapeExponents::Free, Family::Gexp | Family::Ghyp) => {
                zeta[spec.m..2 * spec.m].iter().copied().fold(0.0, f64::max)
            }
            _ => 0.0,
        };
        let b_radius = if spec.family == Family::Garch {
            spectral_radius(&zeta[spec.m..spec.m + spec.n])
        } else {
            0.0
        };
        Ok(Self { spec: spec.clone(), psi, d, f_max, b_radius, shape })
    }

    pub fn evaluate(&self, rho: f64) -> Result<MomentCondition> {
        if !(rho > 0.0 && rho < 1.0) {
            return domain(format!("rho = {rho} outside (0, 1)"));
        }
        let moment_factor = self.shape.abs_moment(2.0 * rho)?;
        let hyperbolic = self.spec.family.is_hyperbolic();
        if hyperbolic {
            let p = self.d.expect("hyperbolic families carry d") + 1.0;
            if rho * p <= 1.0 {
                return Ok(MomentCondition {
                    rho,
                    moment_factor,
                    weight_sum: f64::INFINITY,
                    value: f64::INFINITY,
                    tail_bound: f64::INFINITY,
                    verdict: Verdict::DivergentSum,
                });
            }
        }
        let weight_sum: f64 = self.psi.iter().map(|w| w.powf(rho)).sum();
        let value = moment_factor * weight_sum;
        let tail_bound = moment_factor * self.tail_sum(rho);
        let verdict = if value >= 1.0 {
            Verdict::No
        } else if value + tail_bound < 1.0 {
            Verdict::Yes
        } else {
            Verdict::Inconclusive
        };
        Ok(MomentCondition { rho, moment_factor, weight_sum, value, tail_bound, verdict })
    }

    /// Upper bound on sum_{j > N} psi_j^rho.
    fn tail_sum(&self, rho: f64) -> f64 {
        let n = self.psi.len();
        let last = self.psi[n - 1];
        let nf = n as f64;
        match self.spec.family {
            Family::Zero => 0.0,
            Family::Fgarch | Family::Figarch | Family::Ghyp => {
                // psi_j <= K j^{-p} with K taken from the last coefficient;
                // integral comparison from N.
                let p = self.d.unwrap() + 1.0;
                let k = last * nf.powf(p);
                k.powf(rho) * nf.powf(1.0 - rho * p) / (rho * p - 1.0)
            }
            Family::Gexp | Family::Garch => {
                if last == 0.0 {
                    return 0.0;
                }
                let ratio = if self.spec.family == Family::Gexp {
                    (-self.d.unwrap()).exp() * (1.0 + 1.0 / nf).powf(self.f_max)
                } else {
                    let emp = if n >= 2 && self.psi[n - 2] > 0.0 { last / self.psi[n - 2] } else { 0.0 };
                    self.b_radius.max(emp)
                };
                let q = ratio.powf(rho);
                if q >= 1.0 {
                    f64::INFINITY
                } else {
                    last.powf(rho) * q / (1.0 - q)
                }
            }
        }
    }
}

fn spectral_radius(b: &[f64]) -> f64 {
    let n = b.len();
    if n == 0 {
        return 0.0;
    }
    let mut comp = nalgebra::DMatrix::<f64>::zeros(n, n);
    for (j, &bj) in b.iter().enumerate() {
        comp[(0, j)] = bj;
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    comp.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn moment_condition(
    spec: &ModelSpec,
    zeta: &[f64],
    shape: GedShape,
    rho: f64,
    n_w: usize,
) -> Result<MomentCondition> {
    if !(rho > 0.0 && rho < 1.0) {
        return domain(format!("rho = {rho} outside (0, 1)"));
    }
    MomentChecker::new(spec, zeta, shape, n_w)?.evaluate(rho)
}

/// The satisfied rho with the smallest value, if any.
pub fn find_rho(
    spec: &ModelSpec,
    zeta: &[f64],
    shape: GedShape,
    grid: &[f64],
    n_w: usize,
) -> Result<Option<MomentCondition>> {
    let checker = MomentChecker::new(spec, zeta, shape, n_w)?;
    let mut best: Option<MomentCondition> = None;
    for &rho in grid {
        let mc = checker.evaluate(rho)?;
        if mc.verdict == Verdict::Yes && best.as_ref().is_none_or(|b| mc.value < b.value) {
            best = Some(mc);
        }
    }
    Ok(best)
}

/// Inclusive grid lo, lo + step, ..., <= hi, rounded to 1e-12 to avoid drift.
pub fn rho_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lo <= hi) {
        return domain(format!("invalid grid {lo}:{hi}:{step}"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}
