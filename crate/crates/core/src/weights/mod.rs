//! ARCH(infinity) weight sequences psi_j(zeta) and their zeta-derivatives.
//!
//! Parameter layout inside zeta, per family:
//!
//! | family            | zeta                                   |
//! |-------------------|----------------------------------------|
//! | `Garch`           | a_1..a_m, b_1..b_n                     |
//! | `Fgarch`/`Figarch`| a_1..a_m, b_1..b_n, d                  |
//! | `Gexp`/`Ghyp`     | e_1..e_m, f_1..f_m (only if free), d   |
//! | `Zero`            | (empty)                                |

mod assumptions;
mod fractional;
mod kernel;
mod ratio;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use assumptions::{check_assumptions, AssumptionReport, DecayKind};
pub use fractional::{frac_coeffs, frac_coeffs_d_deriv};
pub use ratio::{check_denominator, ratio_coeffs};

use kernel::{Kernel, KernelLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Garch,
    Fgarch,
    Figarch,
    Gexp,
    Ghyp,
    /// psi == 0. Violates strict positivity of the weights; for tests only.
    Zero,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Garch => "garch",
            Family::Fgarch => "fgarch",
            Family::Figarch => "figarch",
            Family::Gexp => "gexp",
            Family::Ghyp => "ghyp",
            Family::Zero => "zero",
        }
    }

    /// Families whose weights decay like j^{-d-1}.
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, Family::Fgarch | Family::Figarch | Family::Ghyp)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "garch" => Family::Garch,
            "fgarch" => Family::Fgarch,
            "figarch" => Family::Figarch,
            "gexp" => Family::Gexp,
            "ghyp" => Family::Ghyp,
            "zero" => Family::Zero,
            other => return domain(format!("unknown family `{other}`")),
        })
    }
}

/// Shape exponents f_i of the GEXP/GHYP kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeExponents {
    Free,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub shape: ShapeExponents,
}

impl ModelSpec {
    pub fn garch(m: usize, n: usize) -> Self {
        Self { family: Family::Garch, m, n, shape: ShapeExponents::Free }
    }

    pub fn fgarch(m: usize, n: usize) -> Self {
        Self { family: Family::Fgarch, m, n, shape: ShapeExponents::Free }
    }

    pub fn figarch(m: usize, n: usize) -> Self {
        Self { family: Family::Figarch, m, n, shape: ShapeExponents::Free }
    }

    pub fn gexp(m: usize, shape: ShapeExponents) -> Self {
        Self { family: Family::Gexp, m, n: 0, shape }
    }

    pub fn ghyp(m: usize, shape: ShapeExponents) -> Self {
        Self { family: Family::Ghyp, m, n: 0, shape }
    }

    pub fn zero() -> Self {
        Self { family: Family::Zero, m: 0, n: 0, shape: ShapeExponents::Free }
    }

    /// Dimension r of zeta.
    pub fn r(&self) -> usize {
        match self.family {
            Family::Garch => self.m + self.n,
            Family::Fgarch | Family::Figarch => self.m + self.n + 1,
            Family::Gexp | Family::Ghyp => match self.shape {
                ShapeExponents::Free => 2 * self.m + 1,
                ShapeExponents::Fixed(_) => self.m + 1,
            },
            Family::Zero => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::Fgarch if self.m < 1 => domain("fgarch requires m >= 1"),
            Family::Garch if self.m < 1 => domain("garch requires m >= 1"),
            Family::Gexp | Family::Ghyp => {
                if self.m < 1 {
                    return domain("gexp/ghyp require m >= 1");
                }
                if self.n != 0 {
                    return domain("gexp/ghyp take no denominator order n");
                }
                if let ShapeExponents::Fixed(f) = &self.shape {
                    if f.len() != self.m {
                        return domain(format!("expected {} fixed shape exponents, got {}", self.m, f.len()));
                    }
                    check_shape_order(f)?;
                }
                Ok(())
            }
            Family::Zero if self.m != 0 || self.n != 0 => domain("zero family takes no orders"),
            _ => Ok(()),
        }
    }

    /// Names of the zeta coordinates, in layout order.
    pub fn zeta_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.r());
        match self.family {
            Family::Garch | Family::Fgarch | Family::Figarch => {
                names.extend((1..=self.m).map(|i| format!("a{i}")));
                names.extend((1..=self.n).map(|i| format!("b{i}")));
                if self.family != Family::Garch {
                    names.push("d".into());
                }
            }
            Family::Gexp | Family::Ghyp => {
                names.extend((1..=self.m).map(|i| format!("e{i}")));
                if self.shape == ShapeExponents::Free {
                    names.extend((1..=self.m).map(|i| format!("f{i}")));
                }
                names.push("d".into());
            }
            Family::Zero => {}
        }
        names
    }

    /// Names of the full theta = (omega, mu, zeta).
    pub fn param_names(&self) -> Vec<String> {
        let mut v = vec!["omega".to_string(), "mu".to_string()];
        v.extend(self.zeta_names());
        v
    }

    /// Index of d inside zeta, when the family has one.
    pub fn d_index(&self) -> Option<usize> {
        match self.family {
            Family::Garch | Family::Zero => None,
            _ => Some(self.r() - 1),
        }
    }

    /// Checks zeta against the family's parameter-space constraints.
    pub fn validate_zeta(&self, zeta: &[f64]) -> Result<()> {
        self.validate()?;
        if zeta.len() != self.r() {
            return domain(format!("zeta has length {}, expected {}", zeta.len(), self.r()));
        }
        if zeta.iter().any(|v| !v.is_finite()) {
            return domain("zeta contains non-finite values");
        }
        let names = self.zeta_names();
        match self.family {
            Family::Garch | Family::Fgarch | Family::Figarch => {
                for (v, name) in zeta[..self.m + self.n].iter().zip(&names) {
                    if *v <= 0.0 {
                        return domain(format!("{name} = {v} must be positive"));
                    }
                }
                if self.family != Family::Garch {
                    let d = zeta[self.m + self.n];
                    if !(d > 0.0 && d < 1.0) {
                        return domain(format!("d = {d} outside (0, 1)"));
                    }
                }
                check_denominator(&zeta[self.m..self.m + self.n])
            }
            Family::Gexp | Family::Ghyp => {
                for (v, name) in zeta[..self.m].iter().zip(&names) {
                    if *v <= 0.0 {
                        return domain(format!("{name} = {v} must be positive"));
                    }
                }
                if let ShapeExponents::Free = self.shape {
                    check_shape_order(&zeta[self.m..2 * self.m])?;
                }
                let d = zeta[self.r() - 1];
                if d <= 0.0 {
                    return domain(format!("d = {d} must be positive"));
                }
                Ok(())
            }
            Family::Zero => Ok(()),
        }
    }
}

fn check_shape_order(f: &[f64]) -> Result<()> {
    if f.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return domain("shape exponents must be finite and >= 0");
    }
    if f.windows(2).any(|w| w[0] > w[1]) {
        return domain("shape exponents must be nondecreasing");
    }
    Ok(())
}

/// psi_1..psi_N with optional first and second zeta-derivatives.
///
/// Derivatives are stored row-major: `d1[j * r + p]`, `d2[(j * r + p) * r + q]`.
#[derive(Debug, Clone)]
pub struct WeightSet {
    pub r: usize,
    pub order: u8,
    pub psi: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl WeightSet {
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// N x r Jacobian.
    pub fn jacobian(&self) -> DMatrix<f64> {
        assert!(self.order >= 1, "weight set computed without derivatives");
        DMatrix::from_row_slice(self.len(), self.r, &self.d1)
    }

    /// r x r Hessian of psi at 1-based lag `lag`.
    pub fn hessian_at(&self, lag: usize) -> DMatrix<f64> {
        assert!(self.order >= 2, "weight set computed without second derivatives");
        let rr = self.r * self.r;
        let j = lag - 1;
        DMatrix::from_row_slice(self.r, self.r, &self.d2[j * rr..(j + 1) * rr])
    }

    /// Drops trailing lags whose weight and derivatives are exactly zero (underflow).
    pub(crate) fn trim_zeros(&mut self) {
        let r = self.r;
        let mut len = self.psi.len();
        while len > 0 {
            let j = len - 1;
            let zero = self.psi[j] == 0.0
                && (self.order < 1 || self.d1[j * r..(j + 1) * r].iter().all(|v| *v == 0.0))
                && (self.order < 2 || self.d2[j * r * r..(j + 1) * r * r].iter().all(|v| *v == 0.0));
            if !zero {
                break;
            }
            len -= 1;
        }
        self.psi.truncate(len);
        if self.order >= 1 {
            self.d1.truncate(len * r);
        }
        if self.order >= 2 {
            self.d2.truncate(len * r * r);
        }
    }
}

/// Computes psi and derivatives up to `order` without validating zeta or checking positivity.
pub(crate) fn compute_unchecked(spec: &ModelSpec, zeta: &[f64], len: usize, order: u8) -> WeightSet {
    let r = spec.r();
    let (psi, d1, d2) = match spec.family {
        Family::Zero => (
            vec![0.0; len],
            Vec::new(),
            Vec::new(),
        ),
        Family::Gexp | Family::Ghyp => {
            let m = spec.m;
            let fixed;
            let (f, free_f) = match &spec.shape {
                ShapeExponents::Free => (&zeta[m..2 * m], true),
                ShapeExponents::Fixed(v) => {
                    fixed = v.clone();
                    (&fixed[..], false)
                }
            };
            let lay = KernelLayout { e: &zeta[..m], f, free_f, d: zeta[r - 1], r };
            let kind = if spec.family == Family::Gexp { Kernel::Exponential } else { Kernel::Hyperbolic };
            kernel::kernel_weights(kind, &lay, len, order)
        }
        Family::Garch | Family::Fgarch | Family::Figarch => {
            let (h, h1, h2) = arma_numerator(spec, zeta, len, order);
            let b = &zeta[spec.m..spec.m + spec.n];
            ratio::arma_recursion(b, spec.m, r, order, &h, &h1, &h2)
        }
    };
    WeightSet { r, order, psi, d1, d2 }
}

/// Numerator series h of psi(z) b(z) = h(z) for the ARMA-type families.
fn arma_numerator(spec: &ModelSpec, zeta: &[f64], len: usize, order: u8) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (m, n, r) = (spec.m, spec.n, spec.r());
    let a = &zeta[..m];
    let mut h = vec![0.0; len];
    let mut h1 = if order >= 1 { vec![0.0; len * r] } else { Vec::new() };
    let mut h2 = if order >= 2 { vec![0.0; len * r * r] } else { Vec::new() };
    match spec.family {
        Family::Garch => {
            for (k, &ak) in a.iter().enumerate().take(len) {
                h[k] = ak;
                if order >= 1 {
                    h1[k * r + k] = 1.0;
                }
            }
        }
        Family::Fgarch => {
            // h = a(z) D(z), D_k = ptilde_{k+1}
            let di = r - 1;
            let (dc, dc1, dc2) = fractional::frac_coeffs_with_derivs(zeta[di], len);
            for j in 1..=len {
                let row = j - 1;
                for (k0, &ak) in a.iter().enumerate() {
                    let k = k0 + 1;
                    if k > j {
                        break;
                    }
                    let idx = j - k;
                    h[row] += ak * dc[idx];
                    if order >= 1 {
                        h1[row * r + k0] += dc[idx];
                        h1[row * r + di] += ak * dc1[idx];
                    }
                    if order >= 2 {
                        let base = row * r * r;
                        h2[base + k0 * r + di] += dc1[idx];
                        h2[base + di * r + k0] += dc1[idx];
                        h2[base + di * r + di] += ak * dc2[idx];
                    }
                }
            }
        }
        Family::Figarch => {
            // h = b(z) - (1 - a(z)) W(z), W_0 = 1, W_k = -ptilde_k
            let di = r - 1;
            let (pc, pc1, pc2) = fractional::frac_coeffs_with_derivs(zeta[di], len);
            let w = |k: usize| if k == 0 { 1.0 } else { -pc[k - 1] };
            let w1 = |k: usize| if k == 0 { 0.0 } else { -pc1[k - 1] };
            let w2 = |k: usize| if k == 0 { 0.0 } else { -pc2[k - 1] };
            for j in 1..=len {
                let row = j - 1;
                h[row] = -w(j);
                if order >= 1 {
                    h1[row * r + di] = -w1(j);
                }
                if order >= 2 {
                    h2[row * r * r + di * r + di] = -w2(j);
                }
                if j <= n {
                    h[row] -= zeta[m + j - 1];
                    if order >= 1 {
                        h1[row * r + m + j - 1] -= 1.0;
                    }
                }
                for (k0, &ak) in a.iter().enumerate() {
                    let k = k0 + 1;
                    if k > j {
                        break;
                    }
                    h[row] += ak * w(j - k);
                    if order >= 1 {
                        h1[row * r + k0] += w(j - k);
                        h1[row * r + di] += ak * w1(j - k);
                    }
                    if order >= 2 {
                        let base = row * r * r;
                        h2[base + k0 * r + di] += w1(j - k);
                        h2[base + di * r + k0] += w1(j - k);
                        h2[base + di * r + di] += ak * w2(j - k);
                    }
                }
            }
        }
        _ => unreachable!("not an ARMA-type family"),
    }
    (h, h1, h2)
}

/// First non-positive weight that is not an exponential underflow.
///
/// An exact zero is accepted when the preceding weight is already below
/// 1e-290, since the kernel was positive and merely underflowed.
pub(crate) fn first_nonpositive(spec: &ModelSpec, psi: &[f64]) -> Option<(usize, f64)> {
    if spec.family == Family::Zero {
        return None;
    }
    let mut prev = f64::INFINITY;
    for (j, &v) in psi.iter().enumerate() {
        if v < 0.0 || v.is_nan() || (v == 0.0 && prev.abs() >= 1e-290) {
            return Some((j + 1, v));
        }
        prev = v;
    }
    None
}

/// Validated weight computation with positivity enforced.
pub fn weight_set(spec: &ModelSpec, zeta: &[f64], len: usize, order: u8) -> Result<WeightSet> {
    if len < 1 {
        return domain("weight count must be at least 1");
    }
    if order > 2 {
        return domain(format!("derivative order {order} not in 0..=2"));
    }
    spec.validate_zeta(zeta)?;
    let set = compute_unchecked(spec, zeta, len, order);
    if let Some((lag, value)) = first_nonpositive(spec, &set.psi) {
        return Err(Error::Positivity { lag, value });
    }
    if set.psi.iter().any(|v| !v.is_finite()) {
        return domain("non-finite weight");
    }
    Ok(set)
}

/// psi_1..psi_N.
pub fn weights(spec: &ModelSpec, zeta: &[f64], len: usize) -> Result<Vec<f64>> {
    Ok(weight_set(spec, zeta, len, 0)?.psi)
}

/// N x r matrix of d psi_j / d zeta.
pub fn weights_jacobian(spec: &ModelSpec, zeta: &[f64], len: usize) -> Result<DMatrix<f64>> {
    Ok(weight_set(spec, zeta, len, 1)?.jacobian())
}

/// Second derivatives, one r x r matrix per lag.
pub fn weights_hessian(spec: &ModelSpec, zeta: &[f64], len: usize) -> Result<Vec<DMatrix<f64>>> {
    let set = weight_set(spec, zeta, len, 2)?;
    Ok((1..=len).map(|j| set.hessian_at(j)).collect())
}
