use serde::{Deserialize, Serialize};

use super::{decompose, max_abs_entry, SymmetricMatrix};
use crate::dist::{quantile_b_n, HeavyTailLaw};

/// Structural summary of one sampled matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub a_star: f64,
    pub i_star: usize,
    pub j_star: usize,
    pub b_n: f64,
    pub delta: f64,
    /// `#{i : a_ii >= b_n^{11/20}}`.
    pub diag_exceed_count: usize,
    /// Rows with at least two entries of magnitude `>= b_n^{3/4 + delta}`.
    pub rows_with_two_big: usize,
    /// `max_i sum_j |a_ij| 1{|a_ij| <= b_n^{3/4 + delta}}`.
    pub max_truncated_row_sum: f64,
    /// `max_i sum_j |a_ij| / a_star`; 1 when `a_star = 0`.
    pub row_sum_ratio: f64,
    /// Largest number of nonzeros in a row of the intermediate part.
    pub kappa_observed: usize,
    /// Stored (`i <= j`) entries of the large part.
    pub large_count: usize,
}

pub const DEFAULT_DELTA: f64 = 0.05;

pub fn diagnostics(a: &SymmetricMatrix, law: &HeavyTailLaw, delta: f64, eta: f64, zeta: f64) -> TypicalityReport {
    diagnostics_with_bn(a, quantile_b_n(law, a.n()), law.alpha, delta, eta, zeta)
}

/// As [`diagnostics`], with the scaling constant supplied by the caller.
pub fn diagnostics_with_bn(
    a: &SymmetricMatrix,
    b_n: f64,
    alpha: f64,
    delta: f64,
    eta: f64,
    zeta: f64,
) -> TypicalityReport {
    let n = a.n();
    let (a_star, i_star, j_star) = max_abs_entry(a);
    let diag_cut = b_n.powf(11.0 / 20.0);
    let big_cut = b_n.powf(0.75 + delta);
    let diag_exceed_count = (0..n).filter(|&i| a.get(i, i) >= diag_cut).count();
    let mut rows_with_two_big = 0;
    let mut max_truncated_row_sum = 0.0f64;
    for i in 0..n {
        let mut big = 0;
        let mut trunc = 0.0;
        for j in 0..n {
            let m = a.get(i, j).abs();
            if m >= big_cut {
                big += 1;
            }
            if m <= big_cut {
                trunc += m;
            }
        }
        if big >= 2 {
            rows_with_two_big += 1;
        }
        max_truncated_row_sum = max_truncated_row_sum.max(trunc);
    }
    let max_row = a.abs_row_sums().into_iter().fold(0.0, f64::max);
    let row_sum_ratio = if a_star > 0.0 { max_row / a_star } else { 1.0 };
    let (kappa_observed, large_count) = match decompose(a, alpha, eta, zeta) {
        Ok(d) => (
            d.inter.row_counts().into_iter().max().unwrap_or(0),
            d.large.len(),
        ),
        Err(_) => (0, 0),
    };
    TypicalityReport {
        a_star,
        i_star,
        j_star,
        b_n,
        delta,
        diag_exceed_count,
        rows_with_two_big,
        max_truncated_row_sum,
        row_sum_ratio,
        kappa_observed,
        large_count,
    }
}
