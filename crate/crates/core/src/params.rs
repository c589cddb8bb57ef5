use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::weights::ModelSpec;

/// theta = (omega, mu, zeta), stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(omega: f64, mu: f64, zeta: &[f64]) -> Self {
        let mut v = Vec::with_capacity(zeta.len() + 2);
        v.push(omega);
        v.push(mu);
        v.extend_from_slice(zeta);
        Self(v)
    }

    pub fn from_vec(v: Vec<f64>) -> Result<Self> {
        if v.len() < 2 {
            return domain("theta needs at least omega and mu");
        }
        Ok(Self(v))
    }

    pub fn omega(&self) -> f64 {
        self.0[0]
    }

    pub fn mu(&self) -> f64 {
        self.0[1]
    }

    pub fn zeta(&self) -> &[f64] {
        &self.0[2..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if self.len() != spec.r() + 2 {
            return domain(format!("theta has length {}, expected {}", self.len(), spec.r() + 2));
        }
        if !(self.omega() > 0.0) {
            return domain(format!("omega = {} must be positive", self.omega()));
        }
        if !self.mu().is_finite() {
            return domain("mu must be finite");
        }
        spec.validate_zeta(self.zeta())
    }
}

/// The compact box Theta = [omega_L, omega_U] x [mu_L, mu_U] x Upsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.len() < 2 {
            return domain("bounds must have matching lengths of at least 2");
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return domain(format!("bound {i} = [{lo}, {hi}] is not a finite interval"));
            }
        }
        if !(self.lower[0] > 0.0) {
            return domain("omega lower bound must be positive");
        }
        Ok(())
    }

    pub fn validate_for(&self, spec: &ModelSpec) -> Result<()> {
        self.check()?;
        if self.lower.len() != spec.r() + 2 {
            return domain(format!("bounds have length {}, expected {}", self.lower.len(), spec.r() + 2));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((v, lo), hi)| *v >= *lo && *v <= *hi)
    }

    pub fn is_interior(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((v, lo), hi)| *v > *lo && *v < *hi)
    }
}
