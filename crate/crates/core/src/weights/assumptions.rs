use nalgebra::DMatrix;
use serde::Serialize;

use super::{compute_unchecked, first_nonpositive, Family, ModelSpec};
use crate::error::Result;

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    Exponential,
    /// psi_j ~ j^{-exponent}
    Hyperbolic { exponent: f64 },
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub positive: bool,
    /// First failing lag (1-based) and its value.
    pub first_nonpositive: Option<(usize, f64)>,
    pub decay: DecayKind,
    /// Minus the log-log slope of psi_j on j over the tail half.
    pub fitted_decay_exponent: Option<f64>,
    /// max_{k <= j <= N} psi_j / psi_k.
    pub empirical_k: f64,
    /// max of psi_j j^{d+1} over j in [N/2, N], hyperbolic families only.
    pub tail_constant: Option<f64>,
    pub rank: usize,
    pub r: usize,
    /// Lags (1-based) chosen by the greedy row search.
    pub rank_rows: Vec<usize>,
    /// Determinant of the Jacobian restricted to `rank_rows`, when full rank.
    pub rank_determinant: Option<f64>,
    pub clt_unsafe: bool,
}

pub fn check_assumptions(spec: &ModelSpec, zeta: &[f64], n: usize, window: usize) -> Result<AssumptionReport> {
    spec.validate_zeta(zeta)?;
    let n = n.max(1);
    let r = spec.r();
    let set = compute_unchecked(spec, zeta, n.max(window), 1);
    let psi = &set.psi[..n];

    let first_nonpositive = first_nonpositive(spec, psi);

    let d = spec.d_index().map(|i| zeta[i]);
    let decay = match spec.family {
        Family::Zero => DecayKind::None,
        Family::Garch | Family::Gexp => DecayKind::Exponential,
        _ => DecayKind::Hyperbolic { exponent: d.unwrap_or(0.0) + 1.0 },
    };

    // log-log regression over the tail half, positive entries only
    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, &v) in psi.iter().enumerate().skip(n / 2) {
        if v > 0.0 {
            let lx = ((j + 1) as f64).ln();
            let ly = v.ln();
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            cnt += 1.0;
        }
    }
    let denom = cnt * sxx - sx * sx;
    let fitted_decay_exponent = (cnt >= 2.0 && denom > 0.0).then(|| -(cnt * sxy - sx * sy) / denom);

    let mut empirical_k: f64 = 1.0;
    let mut running_min = f64::INFINITY;
    for &v in psi {
        if v > 0.0 {
            running_min = running_min.min(v);
            empirical_k = empirical_k.max(v / running_min);
        }
    }

    let tail_constant = match (spec.family.is_hyperbolic(), d) {
        (true, Some(d)) => Some(
            psi.iter()
                .enumerate()
                .skip(n / 2)
                .map(|(j, &v)| v * ((j + 1) as f64).powf(d + 1.0))
                .fold(0.0_f64, f64::max),
        ),
        _ => None,
    };

    let (rank, rank_rows) = greedy_rank(&set.d1, r, window.min(set.len()));
    let rank_determinant = (r > 0 && rank == r).then(|| {
        let mut sub = DMatrix::<f64>::zeros(r, r);
        for (i, &lag) in rank_rows.iter().enumerate() {
            for p in 0..r {
                sub[(i, p)] = set.d1[(lag - 1) * r + p];
            }
        }
        sub.determinant()
    });

    let clt_unsafe = spec.family.is_hyperbolic() && d.is_some_and(|d| d <= 0.5);

    Ok(AssumptionReport {
        positive: first_nonpositive.is_none(),
        first_nonpositive,
        decay,
        fitted_decay_exponent,
        empirical_k,
        tail_constant,
        rank,
        r,
        rank_rows,
        rank_determinant,
        clt_unsafe,
    })
}

fn numeric_rank(rows: &[Vec<f64>], r: usize) -> usize {
    if rows.is_empty() || r == 0 {
        return 0;
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let mat = DMatrix::from_row_slice(rows.len(), r, &flat);
    let sv = mat.singular_values();
    let top = sv.iter().copied().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

/// Adds Jacobian rows j = 1, 2, ... whenever they raise the numeric rank.
fn greedy_rank(d1: &[f64], r: usize, window: usize) -> (usize, Vec<usize>) {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut lags = Vec::new();
    let mut rank = 0;
    for j in 0..window {
        if rank == r {
            break;
        }
        let row = d1[j * r..(j + 1) * r].to_vec();
        rows.push(row);
        let new_rank = numeric_rank(&rows, r);
        if new_rank > rank {
            rank = new_rank;
            lags.push(j + 1);
        } else {
            rows.pop();
        }
    }
    (rank, lags)
}
