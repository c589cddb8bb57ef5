use crate::error::{domain, Result};

fn check(d: f64, n: usize) -> Result<()> {
    if !(d > 0.0 && d <= 1.0) {
        return domain(format!("fractional order d = {d} outside (0, 1]"));
    }
    if n < 1 {
        return domain("coefficient count must be at least 1");
    }
    Ok(())
}

/// Coefficients of z^j, j = 1..=n, in 1 - (1 - z)^d.
///
/// Uses the ratio recursion `p[j+1] = p[j] (j - d) / (j + 1)`; gamma ratios
/// overflow long before the coefficients become small.
pub fn frac_coeffs(d: f64, n: usize) -> Result<Vec<f64>> {
    check(d, n)?;
    Ok(frac_coeffs_unchecked(d, n))
}

pub(crate) fn frac_coeffs_unchecked(d: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut p = d;
    for j in 1..=n {
        out.push(p);
        let jf = j as f64;
        p *= (jf - d) / (jf + 1.0);
    }
    out
}

/// First (`order = 1`) or second (`order = 2`) derivative in d of [`frac_coeffs`].
pub fn frac_coeffs_d_deriv(d: f64, n: usize, order: u8) -> Result<Vec<f64>> {
    check(d, n)?;
    if !(order == 1 || order == 2) {
        return domain(format!("derivative order {order} not in {{1, 2}}"));
    }
    let (_, d1, d2) = frac_coeffs_with_derivs(d, n);
    Ok(if order == 1 { d1 } else { d2 })
}

/// Coefficients together with their first and second d-derivatives.
pub(crate) fn frac_coeffs_with_derivs(d: f64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = Vec::with_capacity(n);
    let mut p1 = Vec::with_capacity(n);
    let mut p2 = Vec::with_capacity(n);
    let (mut v, mut v1, mut v2) = (d, 1.0, 0.0);
    for j in 1..=n {
        p.push(v);
        p1.push(v1);
        p2.push(v2);
        let jf = j as f64;
        let ratio = (jf - d) / (jf + 1.0);
        let nv2 = v2 * ratio - 2.0 * v1 / (jf + 1.0);
        let nv1 = v1 * ratio - v / (jf + 1.0);
        v *= ratio;
        v1 = nv1;
        v2 = nv2;
    }
    (p, p1, p2)
}
