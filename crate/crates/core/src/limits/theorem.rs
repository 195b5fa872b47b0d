use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LimitsError;

/// Limit theorems covered by the harness. `GRO*` concern the `l_r`
/// Grothendieck value, `RTOP*` the `r -> p` norm and `GROUND` the spin-glass
/// ground state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremId {
    Gro1,
    Gro2,
    Gro2c,
    Gro3,
    Rtop1,
    Rtop2,
    Rtop2c,
    Rtop3,
    Ground,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::Gro1,
        TheoremId::Gro2,
        TheoremId::Gro2c,
        TheoremId::Gro3,
        TheoremId::Rtop1,
        TheoremId::Rtop2,
        TheoremId::Rtop2c,
        TheoremId::Rtop3,
        TheoremId::Ground,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Gro1 => "gro1",
            TheoremId::Gro2 => "gro2",
            TheoremId::Gro2c => "gro2c",
            TheoremId::Gro3 => "gro3",
            TheoremId::Rtop1 => "rtop1",
            TheoremId::Rtop2 => "rtop2",
            TheoremId::Rtop2c => "rtop2c",
            TheoremId::Rtop3 => "rtop3",
            TheoremId::Ground => "ground",
        }
    }

    pub fn is_grothendieck(self) -> bool {
        matches!(self, TheoremId::Gro1 | TheoremId::Gro2 | TheoremId::Gro2c | TheoremId::Gro3)
    }

    pub fn is_operator_norm(self) -> bool {
        matches!(self, TheoremId::Rtop1 | TheoremId::Rtop2 | TheoremId::Rtop2c | TheoremId::Rtop3)
    }

    /// Theorems whose statistic is taken on `mu 1 1^T + A`.
    pub fn uses_mean(self) -> bool {
        matches!(self, TheoremId::Gro3 | TheoremId::Rtop3)
    }

    /// Theorems with a stable (rather than Frechet) limit.
    pub fn is_stable(self) -> bool {
        !matches!(self, TheoremId::Gro1 | TheoremId::Rtop1)
    }

    /// Exponent of the stable power: `(r - 2) / r` for the Grothendieck
    /// family, `1/p - 1/r` for norms, `1` for the ground state.
    pub fn gamma(self, params: &TheoremParams) -> f64 {
        if self.is_grothendieck() {
            1.0 - 2.0 / params.r
        } else if self.is_operator_norm() {
            1.0 / params.p - 1.0 / params.r
        } else {
            1.0
        }
    }

    /// Checks the parameter window of the theorem.
    pub fn validate(self, params: &TheoremParams) -> Result<(), LimitsError> {
        let TheoremParams {
            alpha,
            r,
            p,
            mu,
            centered,
        } = *params;
        let fail = |why: String| Err(LimitsError::Regime(format!("{}: {why}", self.name())));
        if !(alpha > 0.0 && alpha < 2.0) {
            return fail(format!("alpha = {alpha} outside (0, 2)"));
        }
        if self != TheoremId::Ground && !(r >= 1.0 && p >= 1.0) {
            return fail(format!("exponents must be at least 1 (r = {r}, p = {p})"));
        }
        if !mu.is_finite() {
            return fail(format!("mu = {mu} is not finite"));
        }
        let g = self.gamma(params);
        let within = |lo: f64, lo_closed: bool, hi: f64| {
            (if lo_closed { alpha >= lo } else { alpha > lo }) && alpha < hi
        };
        match self {
            TheoremId::Gro1 => {
                if !(r <= 2.0) {
                    return fail(format!("needs 1 <= r <= 2, got r = {r}"));
                }
            }
            TheoremId::Gro2 | TheoremId::Gro2c | TheoremId::Gro3 => {
                if !(r > 2.0) || (self == TheoremId::Gro3 && r.is_infinite()) {
                    return fail(format!("r = {r} outside the admissible range"));
                }
                let a_star = conjugate(r);
                match self {
                    TheoremId::Gro2 => {
                        if !within(0.0, false, a_star) {
                            return fail(format!("needs alpha < {a_star}"));
                        }
                    }
                    TheoremId::Gro2c => {
                        let hi = 2f64.min(r_over_r_minus_2(r));
                        if !centered || !within(a_star, true, hi) {
                            return fail(format!("needs centered entries and {a_star} <= alpha < {hi}"));
                        }
                    }
                    _ => {
                        let hi = (r + 2.0) / r;
                        if !centered || !(mu > 0.0) || !within(a_star, false, hi) {
                            return fail(format!("needs centered entries, mu > 0 and {a_star} < alpha < {hi}"));
                        }
                    }
                }
            }
            TheoremId::Rtop1 => {
                if !(r <= p) {
                    return fail(format!("needs r <= p, got r = {r}, p = {p}"));
                }
            }
            TheoremId::Rtop2 | TheoremId::Rtop2c | TheoremId::Rtop3 => {
                if !(p < r) {
                    return fail(format!("needs p < r, got r = {r}, p = {p}"));
                }
                let a_star = 2.0 / (1.0 + g);
                match self {
                    TheoremId::Rtop2 => {
                        if !within(0.0, false, a_star) {
                            return fail(format!("needs alpha < {a_star}"));
                        }
                    }
                    TheoremId::Rtop2c => {
                        let hi = 2f64.min(1.0 / g);
                        if !centered || !within(a_star, true, hi) {
                            return fail(format!("needs centered entries and {a_star} <= alpha < {hi}"));
                        }
                    }
                    _ => {
                        if !(p > 1.0) || r.is_infinite() || mu == 0.0 {
                            return fail("needs 1 < p < r < inf and mu != 0".into());
                        }
                        let g2 = 1.0 / p.min(2.0) - 1.0 / r.max(2.0);
                        let hi = (2.0 - g) / (g * (g2 - g) + 1.0);
                        if !within(a_star, false, hi) {
                            return fail(format!("needs {a_star} < alpha < {hi}"));
                        }
                    }
                }
            }
            TheoremId::Ground => {
                if !(alpha < 1.0) {
                    return fail(format!("needs alpha < 1, got {alpha}"));
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(self, params: &TheoremParams) -> bool {
        self.validate(params).is_ok()
    }

    /// `(scale, center)` with `normalized = scale * (raw - center)`.
    pub fn affine(self, n: usize, b_n: f64, params: &TheoremParams) -> Result<(f64, f64), LimitsError> {
        self.validate(params)?;
        if !(b_n > 0.0 && b_n.is_finite()) {
            return Err(LimitsError::Regime(format!("b_n = {b_n} must be positive")));
        }
        let nf = n as f64;
        Ok(match self {
            TheoremId::Gro1 => (2f64.powf(2.0 / params.r - 1.0) / b_n, 0.0),
            TheoremId::Gro3 | TheoremId::Rtop3 => {
                let g = self.gamma(params);
                let scale = b_n.powf(-1.0 / g) * nf.powf(1.0 / g - g);
                (scale, nf.powf(1.0 + g) * params.mu.abs())
            }
            _ => (1.0 / b_n, 0.0),
        })
    }

    /// Scale of the fluctuations around the centering, `1 / scale`.
    pub fn fluctuation_scale(self, n: usize, b_n: f64, params: &TheoremParams) -> Result<f64, LimitsError> {
        Ok(1.0 / self.affine(n, b_n, params)?.0)
    }
}

/// `r / (r - 1)`, equal to `1` at `r = inf`.
fn conjugate(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

fn r_over_r_minus_2(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        r / (r - 2.0)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = LimitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('\'', "c");
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| LimitsError::UnknownTheorem(s.to_string()))
    }
}

/// Parameters a theorem window is checked against. `p` is ignored by the
/// Grothendieck family and both exponents by `GROUND`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub alpha: f64,
    pub r: f64,
    pub p: f64,
    pub mu: f64,
    pub centered: bool,
}

impl TheoremParams {
    pub fn new(alpha: f64, r: f64, p: f64) -> Self {
        TheoremParams {
            alpha,
            r,
            p,
            mu: 0.0,
            centered: false,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn centered(mut self, centered: bool) -> Self {
        self.centered = centered;
        self
    }
}

pub fn normalize_statistic(
    id: TheoremId,
    raw: f64,
    n: usize,
    b_n: f64,
    params: &TheoremParams,
) -> Result<f64, LimitsError> {
    let (scale, center) = id.affine(n, b_n, params)?;
    Ok(scale * (raw - center))
}

/// Inverse of [`normalize_statistic`].
pub fn denormalize_statistic(
    id: TheoremId,
    normalized: f64,
    n: usize,
    b_n: f64,
    params: &TheoremParams,
) -> Result<f64, LimitsError> {
    let (scale, center) = id.affine(n, b_n, params)?;
    Ok(center + normalized / scale)
}
