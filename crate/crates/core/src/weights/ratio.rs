use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};

const ROOT_MARGIN: f64 = 1e-8;

/// Checks that b(z) = 1 - sum b_j z^j has every root strictly outside |z| = 1 + 1e-8.
///
/// The roots of b are reciprocals of the eigenvalues of the companion matrix of
/// lambda^n - b_1 lambda^{n-1} - ... - b_n, so the test is on the spectral radius.
pub fn check_denominator(b: &[f64]) -> Result<()> {
    let n = b.len();
    if n == 0 {
        return Ok(());
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Stability("non-finite denominator coefficient".into()));
    }
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for (j, &bj) in b.iter().enumerate() {
        comp[(0, j)] = bj;
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    let radius = comp
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    if radius * (1.0 + ROOT_MARGIN) >= 1.0 {
        return Err(Error::Stability(format!(
            "b(z) has a root with modulus {:.10} <= 1 + 1e-8",
            1.0 / radius
        )));
    }
    Ok(())
}

/// Power-series coefficients c_1..c_n of a(z)/b(z), or of {1 - a(z)}/b(z)
/// beyond its unit constant term when `figarch_form` is set.
///
/// a(z) = sum_{j=1}^m a_j z^j and b(z) = 1 - sum_{j=1}^{n_b} b_j z^j.
pub fn ratio_coeffs(a: &[f64], b: &[f64], n: usize, figarch_form: bool) -> Result<Vec<f64>> {
    if n < 1 {
        return domain("coefficient count must be at least 1");
    }
    check_denominator(b)?;
    let sign = if figarch_form { -1.0 } else { 1.0 };
    let mut c = vec![0.0; n];
    for j in 1..=n {
        let mut v = if j <= a.len() { sign * a[j - 1] } else { 0.0 };
        for (i, &bi) in b.iter().enumerate() {
            let lag = i + 1;
            if lag > j {
                break;
            }
            // c_0 = 1 in the FIGARCH form and 0 otherwise.
            let prev = if lag == j {
                if figarch_form {
                    1.0
                } else {
                    0.0
                }
            } else {
                c[j - lag - 1]
            };
            v += bi * prev;
        }
        c[j - 1] = v;
    }
    Ok(c)
}

/// psi_j = h_j + sum_{i=1}^{min(n, j-1)} b_i psi_{j-i}, differentiated through
/// to second order.
///
/// `h`, `h1`, `h2` hold the numerator series and its derivatives (row-major
/// `len x r` and `len x r x r`). `b_index` is the position of b_1 inside the
/// parameter vector; b_i sits at `b_index + i - 1`.
pub(crate) fn arma_recursion(
    b: &[f64],
    b_index: usize,
    r: usize,
    order: u8,
    h: &[f64],
    h1: &[f64],
    h2: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let len = h.len();
    let mut psi = h.to_vec();
    let mut p1 = if order >= 1 { h1.to_vec() } else { Vec::new() };
    let mut p2 = if order >= 2 { h2.to_vec() } else { Vec::new() };
    for j in 0..len {
        for (i, &bi) in b.iter().enumerate() {
            let lag = i + 1;
            if lag > j {
                break;
            }
            let k = j - lag;
            psi[j] += bi * psi[k];
            if order >= 1 {
                for p in 0..r {
                    p1[j * r + p] += bi * p1[k * r + p];
                }
                p1[j * r + b_index + i] += psi[k];
            }
            if order >= 2 {
                for p in 0..r {
                    for q in 0..r {
                        p2[(j * r + p) * r + q] += bi * p2[(k * r + p) * r + q];
                    }
                }
                let bp = b_index + i;
                for q in 0..r {
                    let dq = p1[k * r + q];
                    p2[(j * r + bp) * r + q] += dq;
                    p2[(j * r + q) * r + bp] += dq;
                }
            }
        }
    }
    (psi, p1, p2)
}
