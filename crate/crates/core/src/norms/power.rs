use super::problem::{kkt_residual, lp_norm, normalize, psi_map};
use super::{Method, NormCertificate, NormError, NormProblem};
use crate::mat::SymmetricMatrix;

/// Nonlinear power iteration `v <- psi_{r*}(A^T psi_p(A v))`, renormalized in
/// `l_r`, for entrywise nonnegative `A` and a strictly positive start.
///
/// Stops once the value moves by at most `tol` (relative) and the first-order
/// residual is at most `10 tol`, or after `max_iter` steps.
pub fn boyd_power_method(
    a: &SymmetricMatrix,
    prob: &NormProblem,
    tol: f64,
    max_iter: usize,
    v0: &[f64],
) -> Result<NormCertificate, NormError> {
    if !prob.is_finite_interior() {
        return Err(NormError::Unsupported(format!(
            "power method needs finite 1 < r, p (r = {}, p = {})",
            prob.r, prob.p
        )));
    }
    if prob.p > prob.r {
        return Err(NormError::Unsupported(format!(
            "power method is only certified for p <= r (r = {}, p = {})",
            prob.r, prob.p
        )));
    }
    if !a.is_nonnegative() {
        return Err(NormError::Domain("power method needs a nonnegative matrix".into()));
    }
    if v0.len() != a.n() || v0.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(NormError::Domain("start vector must be strictly positive".into()));
    }
    let rs = prob.r_dual();
    let mut v = v0.to_vec();
    normalize(&mut v, prob.r);
    let mut value = lp_norm(&a.matvec(&v), prob.p);
    let mut iterations = 0;
    while iterations < max_iter {
        let w = a.matvec(&psi_map(prob.p, &a.matvec(&v)));
        let mut next = psi_map(rs, &w);
        if normalize(&mut next, prob.r) == 0.0 {
            break;
        }
        v = next;
        iterations += 1;
        let new_value = lp_norm(&a.matvec(&v), prob.p);
        let change = (new_value - value).abs();
        value = new_value;
        if change <= tol * value.max(1.0) {
            if kkt_residual(a, prob, &v, value)? <= 10.0 * tol {
                break;
            }
        }
    }
    let residual = kkt_residual(a, prob, &v, value)?;
    let ax = a.matvec(&v);
    let mut y = psi_map(prob.p, &ax);
    normalize(&mut y, prob.p_dual());
    let mut cert = NormCertificate::new(value, v, Some(y), Method::Power);
    cert.kkt_residual = Some(residual);
    cert.iterations = iterations;
    Ok(cert)
}
