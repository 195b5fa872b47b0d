use super::problem::{grothendieck_kkt_residual, kkt_residual, lp_norm, normalize};
use super::{Method, NormCertificate, NormError, NormProblem};
use crate::mat::{PairedSparseMatrix, SparseEntries, SymmetricMatrix};

fn require_gamma(prob: &NormProblem) -> Result<f64, NormError> {
    prob.gamma().ok_or_else(|| {
        NormError::Unsupported(format!("needs p < r (r = {}, p = {})", prob.r, prob.p))
    })
}

/// `(sum_i (sum_j |a_ij|)^{1/gamma})^gamma`, an upper bound on `|A|_{r->p}`
/// for `p < r`.
pub fn rowsum_upper_bound(a: &SymmetricMatrix, prob: &NormProblem) -> Result<f64, NormError> {
    let g = require_gamma(prob)?;
    Ok(lp_norm(&a.abs_row_sums(), 1.0 / g))
}

/// `(2 sum_k |w_k|^{1/gamma})^gamma`.
fn paired_value(pairs: &[f64], gamma: f64) -> f64 {
    let m = pairs.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = pairs.iter().map(|w| (w.abs() / m).powf(1.0 / gamma)).sum();
    m * (2.0 * s).powf(gamma)
}

/// Fills slots `2k, 2k+1` with `(|w|^e sgn w, |w|^e)`.
fn paired_vector(n: usize, pairs: &[f64], e: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for (k, &w) in pairs.iter().enumerate() {
        let m = w.abs().powf(e);
        v[2 * k] = m.copysign(w);
        v[2 * k + 1] = m;
    }
    v
}

fn unit_e0(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if n > 0 {
        v[0] = 1.0;
    }
    v
}

/// Exact `r -> p` norm of a paired matrix, `1 <= p < r <= inf`.
pub fn paired_norm_closed_form(pm: &PairedSparseMatrix, prob: &NormProblem) -> Result<NormCertificate, NormError> {
    let g = require_gamma(prob)?;
    let (r, p) = (prob.r, prob.p);
    let n = pm.n();
    let pairs = pm.pairs();
    if pairs.is_empty() {
        return Ok(NormCertificate::new(0.0, unit_e0(n), Some(unit_e0(n)), Method::ClosedForm));
    }
    // Scale-free exponents; r = inf sends both to their limits.
    let (ex, ey) = if r.is_infinite() {
        (0.0, p - 1.0)
    } else {
        (p / (r - p), r * (p - 1.0) / (r - p))
    };
    let scale = pairs[0].abs();
    let rel: Vec<f64> = pairs.iter().map(|w| w / scale).collect();
    let mut x = paired_vector(n, &rel, ex);
    let mut y = paired_vector(n, &rel, ey);
    normalize(&mut x, r);
    normalize(&mut y, prob.p_dual());
    let mut cert = NormCertificate::new(paired_value(pairs, g), x, Some(y), Method::ClosedForm);
    if prob.is_finite_interior() {
        let a = pm.to_symmetric();
        cert.kkt_residual = Some(kkt_residual(&a, prob, &cert.x, cert.value)?);
    }
    Ok(cert)
}

/// Exact Grothendieck value of a paired matrix for `r > 2`; the same number
/// as the `r -> r*` closed form.
pub fn paired_grothendieck_closed_form(pm: &PairedSparseMatrix, r: f64) -> Result<NormCertificate, NormError> {
    if !(r > 2.0) {
        return Err(NormError::Unsupported(format!("paired Grothendieck form needs r > 2, got {r}")));
    }
    let prob = NormProblem::grothendieck(r)?;
    let g = require_gamma(&prob)?;
    let n = pm.n();
    let pairs = pm.pairs();
    if pairs.is_empty() {
        return Ok(NormCertificate::new(0.0, unit_e0(n), None, Method::ClosedForm));
    }
    let e = if r.is_infinite() { 0.0 } else { 1.0 / (r - 2.0) };
    let scale = pairs[0].abs();
    let rel: Vec<f64> = pairs.iter().map(|w| w / scale).collect();
    let mut x = paired_vector(n, &rel, e);
    normalize(&mut x, r);
    let mut cert = NormCertificate::new(paired_value(pairs, g), x, None, Method::ClosedForm);
    if r.is_finite() {
        let a = pm.to_symmetric();
        cert.kkt_residual = Some(grothendieck_kkt_residual(&a, r, &cert.x, cert.value)?);
    }
    Ok(cert)
}

/// Trial vectors `(x_hat, y_hat)` for `mu 11^T + inter + large`: a constant
/// part carried by `mu` plus, for each large entry, powers of its magnitude
/// on its two coordinates (signed on the smaller index).
pub fn ansatz_vectors(mu: f64, large: &SparseEntries, prob: &NormProblem) -> Result<(Vec<f64>, Vec<f64>), NormError> {
    if !(prob.is_finite_interior() && prob.p < prob.r) {
        return Err(NormError::Unsupported(format!(
            "ansatz needs 1 < p < r < inf (r = {}, p = {})",
            prob.r, prob.p
        )));
    }
    let (r, p) = (prob.r, prob.p);
    let n = large.n();
    let ex = p / (r - p);
    let ey = r * (p - 1.0) / (r - p);
    let c = n as f64 * mu.abs();
    let mut x = vec![c.powf(ex) * sign(mu); n];
    let mut y = vec![c.powf(ey); n];
    for &(i, j, v) in large.entries() {
        if i == j {
            continue;
        }
        // Row i sees v at j > i; row j sees it at i < j.
        x[i] += v.abs().powf(ex) * sign(v);
        y[i] += v.abs().powf(ey) * sign(v);
        x[j] += v.abs().powf(ex);
        y[j] += v.abs().powf(ey);
    }
    Ok((x, y))
}

fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Lower and upper bounds on `|mu 11^T + inter + large|_{r->p}`: the dual
/// value at the ansatz vectors, and the row-sum bound of the absolute
/// three-part matrix.
pub fn ansatz_bounds(
    mu: f64,
    inter: &SparseEntries,
    large: &SparseEntries,
    prob: &NormProblem,
) -> Result<(f64, f64), NormError> {
    let n = inter.n();
    if large.n() != n {
        return Err(NormError::Unsupported("inter and large parts differ in dimension".into()));
    }
    let (x, y) = ansatz_vectors(mu, large, prob)?;
    let g = require_gamma(prob)?;

    let mut rows = vec![n as f64 * mu.abs(); n];
    for part in [inter, large] {
        for (s, t) in rows.iter_mut().zip(part.abs_row_sums()) {
            *s += t;
        }
    }
    let upper = lp_norm(&rows, 1.0 / g);

    let nx = lp_norm(&x, prob.r);
    let ny = lp_norm(&y, prob.p_dual());
    let lower = if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        let xs: Vec<f64> = x.iter().map(|v| v / nx).collect();
        let ys: Vec<f64> = y.iter().map(|v| v / ny).collect();
        let mut b = mu * xs.iter().sum::<f64>() * ys.iter().sum::<f64>();
        for part in [inter, large] {
            for &(i, j, v) in part.entries() {
                b += v * ys[i] * xs[j];
                if i != j {
                    b += v * ys[j] * xs[i];
                }
            }
        }
        b
    };
    Ok((lower, upper))
}

/// Bounds on `max { x^T B x : |x|_r <= 1 }` for `B = mu 11^T + inter +
/// large`, `2 < r < inf`: the quadratic form at the normalized ansatz vector
/// for `r -> r*`, and the row-sum bound for that norm.
pub fn ansatz_grothendieck_bounds(
    mu: f64,
    inter: &SparseEntries,
    large: &SparseEntries,
    r: f64,
) -> Result<(f64, f64), NormError> {
    if !(r > 2.0 && r.is_finite()) {
        return Err(NormError::Unsupported(format!("needs 2 < r < inf, got {r}")));
    }
    let prob = NormProblem::grothendieck(r)?;
    let (_, upper) = ansatz_bounds(mu, inter, large, &prob)?;
    let (mut x, _) = ansatz_vectors(mu, large, &prob)?;
    if normalize(&mut x, r) == 0.0 {
        return Ok((0.0, upper));
    }
    let s: f64 = x.iter().sum();
    let mut q = mu * s * s;
    for part in [inter, large] {
        for &(i, j, v) in part.entries() {
            q += if i == j { v * x[i] * x[i] } else { 2.0 * v * x[i] * x[j] };
        }
    }
    Ok((q, upper))
}

/// The paired closed form applied to the off-diagonal values of a large
/// part, whether or not they are actually pairable.
pub fn large_part_value(large: &SparseEntries, gamma: f64) -> f64 {
    let w: Vec<f64> = large
        .entries()
        .iter()
        .filter(|e| e.0 != e.1)
        .map(|e| e.2)
        .collect();
    paired_value(&w, gamma)
}
