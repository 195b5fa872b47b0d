use serde::{Deserialize, Serialize};

use super::{MatError, SparseEntries, SymmetricMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Uncentered entries below the stable threshold.
    SmallAlpha,
    /// Centered entries with a nonzero shift.
    CenteredAlpha,
}

impl std::str::FromStr for Regime {
    type Err = MatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small_alpha" | "small" => Ok(Regime::SmallAlpha),
            "centered_alpha" | "centered" => Ok(Regime::CenteredAlpha),
            other => Err(MatError::Regime(format!("unknown regime {other:?}"))),
        }
    }
}

/// `1/p - 1/r`, with `1/inf = 0`.
pub fn gamma_of(r: f64, p: f64) -> f64 {
    1.0 / p - 1.0 / r
}

/// Exponents `(eta, zeta)` of the cut-offs `n^{(1+eta)/alpha}` and
/// `n^{(2-zeta)/alpha}`.
pub fn default_thresholds(regime: Regime, alpha: f64, r: f64, p: f64) -> Result<(f64, f64), MatError> {
    let ag = alpha * gamma_of(r, p);
    let eta = 0.5 * (1.0 - ag);
    let zeta = match regime {
        Regime::SmallAlpha => (0.25 * (1.0 - ag)).min(1.0 - alpha / 2.0),
        Regime::CenteredAlpha => (0.25 * (1.0 - ag)).min((1.0 - alpha / 2.0) * (p - 1.0) / r),
    };
    if !(eta > 0.0 && zeta > 0.0) {
        return Err(MatError::Regime(format!(
            "thresholds eta = {eta}, zeta = {zeta} must both be positive"
        )));
    }
    Ok((eta, zeta))
}

/// Entrywise split `A = small + inter + large` by magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub small: SymmetricMatrix,
    pub inter: SparseEntries,
    pub large: SparseEntries,
    pub eta: f64,
    pub zeta: f64,
    pub t_low: f64,
    pub t_high: f64,
}

/// `|a| <= t_low` goes to `small`, `|a| > t_high` to `large`, the rest to
/// `inter`, with `t_low = n^{(1+eta)/alpha}` and `t_high = n^{(2-zeta)/alpha}`.
pub fn decompose(a: &SymmetricMatrix, alpha: f64, eta: f64, zeta: f64) -> Result<Decomposition, MatError> {
    if !(zeta > 0.0 && zeta < eta) {
        return Err(MatError::Regime(format!(
            "need 0 < zeta < eta, got eta = {eta}, zeta = {zeta}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(MatError::Regime(format!("alpha = {alpha} must be positive")));
    }
    let n = a.n();
    let nf = n as f64;
    let t_low = nf.powf((1.0 + eta) / alpha);
    let t_high = nf.powf((2.0 - zeta) / alpha);
    let mut small = a.clone();
    let mut inter = Vec::new();
    let mut large = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = a.get(i, j);
            let m = v.abs();
            if m > t_high {
                large.push((i, j, v));
                small.set(i, j, 0.0);
            } else if m > t_low {
                inter.push((i, j, v));
                small.set(i, j, 0.0);
            }
        }
    }
    Ok(Decomposition {
        small,
        inter: SparseEntries::from_sorted(n, inter),
        large: SparseEntries::from_sorted(n, large),
        eta,
        zeta,
        t_low,
        t_high,
    })
}

/// Inverse of [`decompose`]; bitwise equal to the original matrix.
pub fn reassemble(d: &Decomposition) -> SymmetricMatrix {
    let mut a = d.small.clone();
    for part in [&d.inter, &d.large] {
        for &(i, j, v) in part.entries() {
            a.set(i, j, a.get(i, j) + v);
        }
    }
    a
}
