use serde::{Deserialize, Serialize};

use super::NormError;
use crate::mat::SymmetricMatrix;

/// Exponents of the `r -> p` operator norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProblem {
    pub r: f64,
    pub p: f64,
}

/// Hölder conjugate with `1* = inf` and `inf* = 1`.
pub fn dual_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

impl NormProblem {
    pub fn new(r: f64, p: f64) -> Result<Self, NormError> {
        for (name, q) in [("r", r), ("p", p)] {
            if !(q >= 1.0) {
                return Err(NormError::Unsupported(format!("exponent {name} = {q} below 1")));
            }
        }
        Ok(Self { r, p })
    }

    /// The `r -> r*` problem dual to the Grothendieck value.
    pub fn grothendieck(r: f64) -> Result<Self, NormError> {
        Self::new(r, dual_exponent(r))
    }

    pub fn r_dual(&self) -> f64 {
        dual_exponent(self.r)
    }

    pub fn p_dual(&self) -> f64 {
        dual_exponent(self.p)
    }

    /// `1/p - 1/r` when `p < r`.
    pub fn gamma(&self) -> Option<f64> {
        (self.p < self.r).then(|| 1.0 / self.p - 1.0 / self.r)
    }

    pub fn is_finite_interior(&self) -> bool {
        self.r > 1.0 && self.r.is_finite() && self.p > 1.0 && self.p.is_finite()
    }
}

/// `l_q` norm for `q` in `[1, inf]`, computed with a max-rescale so large
/// entries do not overflow.
pub fn lp_norm(x: &[f64], q: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 || q.is_infinite() || !m.is_finite() {
        return m;
    }
    if q == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if q == 2.0 {
        return m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt();
    }
    m * x.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `|t|^{q-1} sgn t`.
#[inline]
pub fn psi(q: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if q == 2.0 {
        t
    } else {
        t.abs().powf(q - 1.0).copysign(t)
    }
}

pub fn psi_map(q: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|&t| psi(q, t)).collect()
}

/// Scales `x` to unit `l_q` norm in place; leaves a zero vector alone.
pub(crate) fn normalize(x: &mut [f64], q: f64) -> f64 {
    let s = lp_norm(x, q);
    if s > 0.0 && s.is_finite() {
        x.iter_mut().for_each(|v| *v /= s);
    }
    s
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// `y^T A x / (|x|_r |y|_{p*})`, zero when either vector vanishes.
pub fn dual_value(a: &SymmetricMatrix, prob: &NormProblem, x: &[f64], y: &[f64]) -> f64 {
    let nx = lp_norm(x, prob.r);
    let ny = lp_norm(y, prob.p_dual());
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    dot(y, &a.matvec(x)) / (nx * ny)
}

/// `|A^T psi_p(Av) - value^p psi_r(v)|_inf / max(1, value^p)` for unit `v`.
pub fn kkt_residual(a: &SymmetricMatrix, prob: &NormProblem, v: &[f64], value: f64) -> Result<f64, NormError> {
    if !prob.is_finite_interior() {
        return Err(NormError::Unsupported(format!(
            "first-order residual needs 1 < r, p < inf (r = {}, p = {})",
            prob.r, prob.p
        )));
    }
    let g = a.matvec(&psi_map(prob.p, &a.matvec(v)));
    let vp = value.powf(prob.p);
    let res = g
        .iter()
        .zip(v)
        .map(|(gi, &vi)| (gi - vp * psi(prob.r, vi)).abs())
        .fold(0.0, f64::max);
    Ok(res / vp.max(1.0))
}

/// `|A x - value psi_r(x)|_inf / max(1, |value|)` for a unit-`l_r` `x`.
pub fn grothendieck_kkt_residual(a: &SymmetricMatrix, r: f64, x: &[f64], value: f64) -> Result<f64, NormError> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(NormError::Unsupported(format!(
            "first-order residual needs 1 < r < inf (r = {r})"
        )));
    }
    let ax = a.matvec(x);
    let res = ax
        .iter()
        .zip(x)
        .map(|(g, &xi)| (g - value * psi(r, xi)).abs())
        .fold(0.0, f64::max);
    Ok(res / value.abs().max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Power,
    Ascent,
    Oracle,
    Eigen,
    Hypercube,
    /// Lower end of the ansatz sandwich, no optimizer run.
    Ansatz,
    /// Closed-form large-part surrogate.
    Surrogate,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Power => "power",
            Method::Ascent => "ascent",
            Method::Oracle => "oracle",
            Method::Eigen => "eigen",
            Method::Hypercube => "hypercube",
            Method::Ansatz => "ansatz",
            Method::Surrogate => "surrogate",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A norm or Grothendieck value with the vectors that attain it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub value: f64,
    /// Unit `l_r` vector.
    pub x: Vec<f64>,
    /// Unit `l_{p*}` vector; `None` for Grothendieck values, where `y = x`.
    pub y: Option<Vec<f64>>,
    /// `None` where the first-order residual is undefined (extreme exponents).
    pub kkt_residual: Option<f64>,
    pub method: Method,
    pub iterations: usize,
    /// Smoothed value minus exact re-evaluation, when smoothing was used.
    pub smoothing_gap: Option<f64>,
}

impl NormCertificate {
    pub(crate) fn new(value: f64, x: Vec<f64>, y: Option<Vec<f64>>, method: Method) -> Self {
        Self {
            value,
            x,
            y,
            kkt_residual: None,
            method,
            iterations: 0,
            smoothing_gap: None,
        }
    }
}
