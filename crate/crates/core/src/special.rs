//! Gamma-family special functions.
//!
//! `ln_gamma`, `gamma` and `digamma` delegate to statrs (Lanczos, ~1e-15
//! relative). statrs has no trigamma, so it is implemented here with upward
//! recurrence followed by the asymptotic series.

use statrs::function::gamma as sg;

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    sg::ln_gamma(x)
}

#[inline]
pub fn gamma(x: f64) -> f64 {
    sg::gamma(x)
}

#[inline]
pub fn digamma(x: f64) -> f64 {
    sg::digamma(x)
}

/// Trigamma function for x > 0.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    // Shift until the asymptotic series is accurate to ~1e-16.
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let z = 1.0 / (x * x);
    // 1/x + 1/(2x^2) + sum B_{2k}/x^{2k+1}
    let series = z
        * (1.0 / 6.0
            + z * (-1.0 / 30.0
                + z * (1.0 / 42.0 + z * (-1.0 / 30.0 + z * (5.0 / 66.0 + z * (-691.0 / 2730.0 + z * 7.0 / 6.0))))));
    acc + 1.0 / x + 0.5 * z + series / x
}
