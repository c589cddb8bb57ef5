//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use archinf::weights::{Family, ModelSpec, ShapeExponents};
use statrs::function::gamma::{gamma, ln_gamma};

/// Coefficient of z^j in 1 - (1 - z)^d, from the Gamma-ratio formula.
pub fn frac_gamma_ratio(d: f64, j: usize) -> f64 {
    if d == 1.0 {
        return if j == 1 { 1.0 } else { 0.0 };
    }
    // Gamma(j - d) / (-Gamma(-d) Gamma(j + 1)), with -Gamma(-d) = Gamma(1 - d) / d
    (ln_gamma(j as f64 - d) - ln_gamma(1.0 - d) + d.ln() - ln_gamma(j as f64 + 1.0)).exp()
}

/// Same coefficient as the finite product (d / j) prod_{i<j} (1 - d / i), which
/// is what the Gamma ratio reduces to; keeps full precision at large j.
pub fn frac_product(d: f64, j: usize) -> f64 {
    let mut p = d / j as f64;
    for i in 1..j {
        p *= 1.0 - d / i as f64;
    }
    p
}

/// Power series of p(z) / q(z) up to z^len by long division; q[0] must be nonzero.
pub fn series_divide(p: &[f64], q: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len + 1];
    let mut rem: Vec<f64> = (0..=len).map(|i| p.get(i).copied().unwrap_or(0.0)).collect();
    for i in 0..=len {
        let c = rem[i] / q[0];
        out[i] = c;
        for (k, qk) in q.iter().enumerate() {
            if i + k <= len {
                rem[i + k] -= c * qk;
            }
        }
    }
    out
}

pub fn series_mul(p: &[f64], q: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len + 1];
    for (i, pi) in p.iter().enumerate().take(len + 1) {
        for (k, qk) in q.iter().enumerate() {
            if i + k <= len {
                out[i + k] += pi * qk;
            }
        }
    }
    out
}

/// psi_1..psi_len straight from each family's defining formula.
pub fn brute_weights(spec: &ModelSpec, zeta: &[f64], len: usize) -> Vec<f64> {
    let (m, n) = (spec.m, spec.n);
    match spec.family {
        Family::Zero => vec![0.0; len],
        Family::Garch | Family::Fgarch | Family::Figarch => {
            let mut apoly = vec![0.0; m + 1];
            apoly[1..].copy_from_slice(&zeta[..m]);
            let mut bpoly = vec![1.0; n + 1];
            for j in 1..=n {
                bpoly[j] = -zeta[m + j - 1];
            }
            match spec.family {
                Family::Garch => series_divide(&apoly, &bpoly, len)[1..].to_vec(),
                Family::Fgarch => {
                    // a(z) / b(z) * z^{-1} (1 - (1 - z)^d)
                    let d = zeta[m + n];
                    let shifted: Vec<f64> = (0..=len).map(|k| frac_product(d, k + 1)).collect();
                    let num = series_mul(&apoly, &shifted, len);
                    series_divide(&num, &bpoly, len)[1..].to_vec()
                }
                _ => {
                    // 1 - (1 - a(z)) (1 - z)^d / b(z)
                    let d = zeta[m + n];
                    let w: Vec<f64> = (0..=len).map(|k| if k == 0 { 1.0 } else { -frac_product(d, k) }).collect();
                    let one_minus_a: Vec<f64> = apoly.iter().enumerate().map(|(i, v)| if i == 0 { 1.0 } else { -v }).collect();
                    let prod = series_mul(&one_minus_a, &w, len);
                    let ratio = series_divide(&prod, &bpoly, len);
                    ratio[1..].iter().map(|v| -v).collect()
                }
            }
        }
        Family::Gexp | Family::Ghyp => {
            let e = &zeta[..m];
            let f: Vec<f64> = match &spec.shape {
                ShapeExponents::Free => zeta[m..2 * m].to_vec(),
                ShapeExponents::Fixed(v) => v.clone(),
            };
            let d = zeta[zeta.len() - 1];
            (1..=len)
                .map(|j| {
                    let jf = j as f64;
                    e.iter()
                        .zip(&f)
                        .map(|(ei, fi)| {
                            if spec.family == Family::Gexp {
                                ei * d.powf(fi + 1.0) * jf.powf(*fi) * (-d * jf).exp() / gamma(fi + 1.0)
                            } else {
                                ei * d * (jf + 1.0).ln().powf(*fi) * (jf + 1.0).powf(-d - 1.0) / gamma(fi + 1.0)
                            }
                        })
                        .sum()
                })
                .collect()
        }
    }
}

/// Truncated variance by the defining double sum.
pub fn brute_sigma2(omega: f64, mu: f64, psi: &[f64], y: &[f64]) -> Vec<f64> {
    (0..y.len())
        .map(|t| {
            let mut s = omega;
            for j in 1..=t {
                s += psi[j - 1] * (y[t - j] - mu).powi(2);
            }
            s
        })
        .collect()
}

pub fn brute_qll(omega: f64, mu: f64, psi: &[f64], y: &[f64]) -> f64 {
    let s2 = brute_sigma2(omega, mu, psi, y);
    y.iter().zip(&s2).map(|(v, s)| (v - mu).powi(2) / s + s.ln()).sum::<f64>() / y.len() as f64
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integral of a symmetric integrand over the real line as twice the integral
/// over [0, upper], using geometric panels so sharp peaks at 0 and long tails
/// are both resolved.
pub fn integrate_symmetric(f: impl Fn(f64) -> f64, upper: f64) -> f64 {
    let nodes = gauss_legendre(20);
    let mut edges = vec![0.0, 1e-30];
    while *edges.last().unwrap() < upper {
        let next = (edges.last().unwrap() * 1.25).min(upper);
        edges.push(next);
    }
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in &nodes {
            total += wt * half * f(mid + half * x);
        }
    }
    2.0 * total
}

pub fn all_specs() -> Vec<ModelSpec> {
    vec![
        ModelSpec::garch(1, 1),
        ModelSpec::garch(2, 2),
        ModelSpec::fgarch(1, 0),
        ModelSpec::fgarch(2, 1),
        ModelSpec::figarch(0, 0),
        ModelSpec::figarch(1, 1),
        ModelSpec::gexp(1, ShapeExponents::Fixed(vec![0.0])),
        ModelSpec::gexp(2, ShapeExponents::Free),
        ModelSpec::ghyp(1, ShapeExponents::Fixed(vec![1.0])),
        ModelSpec::ghyp(2, ShapeExponents::Free),
    ]
}

/// A valid zeta for each spec in [`all_specs`]; `u` in [0, 1) varies it.
pub fn sample_zeta(spec: &ModelSpec, u: &[f64]) -> Vec<f64> {
    let at = |i: usize| u[i % u.len()];
    match spec.family {
        Family::Garch => {
            let mut z: Vec<f64> = (0..spec.m).map(|i| 0.02 + 0.08 * at(i)).collect();
            z.extend((0..spec.n).map(|i| (0.2 + 0.5 * at(i + 3)) / spec.n as f64));
            z
        }
        Family::Fgarch => {
            let mut z: Vec<f64> = (0..spec.m).map(|i| (0.1 + 0.4 * at(i)) / spec.m as f64).collect();
            z.extend((0..spec.n).map(|i| (0.1 + 0.3 * at(i + 3)) / spec.n as f64));
            z.push(0.3 + 0.6 * at(5));
            z
        }
        Family::Figarch => {
            // keep weights positive: b close to d, a small
            let d = 0.3 + 0.5 * at(5);
            let mut z: Vec<f64> = (0..spec.m).map(|i| 0.02 + 0.05 * at(i)).collect();
            z.extend((0..spec.n).map(|_| 0.6 * d));
            z.push(d);
            z
        }
        Family::Gexp | Family::Ghyp => {
            let mut z: Vec<f64> = (0..spec.m).map(|i| (0.2 + 0.5 * at(i)) / spec.m as f64).collect();
            if spec.shape == ShapeExponents::Free {
                let mut f: Vec<f64> = (0..spec.m).map(|i| 2.0 * at(i + 2)).collect();
                f.sort_by(f64::total_cmp);
                z.extend(f);
            }
            z.push(if spec.family == Family::Gexp { 0.4 + 1.0 * at(4) } else { 0.6 + 1.0 * at(4) });
            z
        }
        Family::Zero => Vec::new(),
    }
}
