//! Generalized exponential and hyperbolic kernels.
//!
//! Each weight is a sum of components `e_i * exp(L_i(j))` where the log-kernel
//! L_i depends on (f_i, d). All derivatives are taken through L_i.

use crate::special::{digamma, ln_gamma, trigamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kernel {
    Exponential,
    Hyperbolic,
}

/// Parameter positions inside zeta: e_i at `i`, f_i at `f_index + i` when free, d at `d_index`.
pub(crate) struct KernelLayout<'a> {
    pub e: &'a [f64],
    pub f: &'a [f64],
    pub free_f: bool,
    pub d: f64,
    pub r: usize,
}

pub(crate) fn kernel_weights(
    kernel: Kernel,
    lay: &KernelLayout<'_>,
    len: usize,
    order: u8,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = lay.e.len();
    let r = lay.r;
    let d = lay.d;
    let d_index = r - 1;
    let mut psi = vec![0.0; len];
    let mut p1 = if order >= 1 { vec![0.0; len * r] } else { Vec::new() };
    let mut p2 = if order >= 2 { vec![0.0; len * r * r] } else { Vec::new() };

    let lg: Vec<f64> = lay.f.iter().map(|&f| ln_gamma(f + 1.0)).collect();
    let dg: Vec<f64> = lay.f.iter().map(|&f| digamma(f + 1.0)).collect();
    let tg: Vec<f64> = if order >= 2 && lay.free_f {
        lay.f.iter().map(|&f| trigamma(f + 1.0)).collect()
    } else {
        vec![0.0; m]
    };
    let ln_d = d.ln();

    for j in 0..len {
        let lag = (j + 1) as f64;
        // x = ln j for GEXP, ln ln(j+1) for GHYP
        let (lx, lin) = match kernel {
            Kernel::Exponential => (lag.ln(), lag),
            Kernel::Hyperbolic => {
                let l = (lag + 1.0).ln();
                (l.ln(), l)
            }
        };
        for i in 0..m {
            let f = lay.f[i];
            let (log_k, ldf, ldd, l2ff, l2dd, l2fd) = match kernel {
                Kernel::Exponential => {
                    // log k = (f+1) ln d + f ln j - d j - lnG(f+1)
                    let log_k = (f + 1.0) * ln_d + f * lx - d * lin - lg[i];
                    (log_k, ln_d + lx - dg[i], (f + 1.0) / d - lin, -tg[i], -(f + 1.0) / (d * d), 1.0 / d)
                }
                Kernel::Hyperbolic => {
                    // log k = ln d + f ln ln(j+1) - (d+1) ln(j+1) - lnG(f+1)
                    let log_k = ln_d + f * lx - (d + 1.0) * lin - lg[i];
                    (log_k, lx - dg[i], 1.0 / d - lin, -tg[i], -1.0 / (d * d), 0.0)
                }
            };
            let k = log_k.exp();
            let term = lay.e[i] * k;
            psi[j] += term;
            if order >= 1 {
                let row = &mut p1[j * r..(j + 1) * r];
                row[i] += k;
                if lay.free_f {
                    row[m + i] += term * ldf;
                }
                row[d_index] += term * ldd;
            }
            if order >= 2 {
                let base = j * r * r;
                let mut add = |p: usize, q: usize, v: f64| {
                    p2[base + p * r + q] += v;
                    if p != q {
                        p2[base + q * r + p] += v;
                    }
                };
                // e_i is linear: no (e_i, e_i) term.
                add(i, d_index, k * ldd);
                add(d_index, d_index, term * (ldd * ldd + l2dd));
                if lay.free_f {
                    let fi = m + i;
                    add(i, fi, k * ldf);
                    add(fi, fi, term * (ldf * ldf + l2ff));
                    add(fi, d_index, term * (ldf * ldd + l2fd));
                }
            }
        }
    }
    (psi, p1, p2)
}
