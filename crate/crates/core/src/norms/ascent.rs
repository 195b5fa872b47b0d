use nalgebra::SymmetricEigen;

use super::problem::{dot, grothendieck_kkt_residual, kkt_residual, lp_norm, normalize, psi, psi_map};
use super::spin::{gray_max, hypercube_max, witness_vector, EXACT_SPIN_LIMIT};
use super::{Method, NormCertificate, NormError, NormProblem};
use crate::dist::Rng;
use crate::mat::SymmetricMatrix;

/// Exponent cap used when an infinite or unit exponent has to be smoothed.
pub const SMOOTHING_EPS: f64 = 1e-3;
pub const MAX_ITER: usize = 10_000;
/// First-order residual the best restart is polished towards.
pub const POLISH_KKT: f64 = 1e-12;

fn gaussian(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

struct Run {
    value: f64,
    x: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// Maximizes `|A(x + t d)|_p / |x + t d|_r` over `t >= 0` by bracketing and
/// golden-section search; returns the unit-normalized point if it improves.
fn line_extrapolate(a: &SymmetricMatrix, prob: &NormProblem, x: &[f64], d: &[f64], value: f64) -> Option<(Vec<f64>, f64)> {
    let f = |t: f64| {
        let y: Vec<f64> = x.iter().zip(d).map(|(u, v)| u + t * v).collect();
        let ny = lp_norm(&y, prob.r);
        if ny == 0.0 {
            return f64::NEG_INFINITY;
        }
        lp_norm(&a.matvec(&y), prob.p) / ny
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut f_hi = f(hi);
    if !(f_hi > value) {
        return None;
    }
    let mut mid = hi;
    let mut f_mid = f_hi;
    for _ in 0..60 {
        hi = 2.0 * mid;
        f_hi = f(hi);
        if f_hi <= f_mid {
            break;
        }
        lo = mid;
        mid = hi;
        f_mid = f_hi;
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = hi - phi * (hi - lo);
        let e = lo + phi * (hi - lo);
        if f(c) >= f(e) {
            hi = e;
        } else {
            lo = c;
        }
    }
    let t = 0.5 * (lo + hi);
    let ft = f(t);
    let (t, ft) = if ft >= f_mid { (t, ft) } else { (mid, f_mid) };
    if ft <= value {
        return None;
    }
    let mut y: Vec<f64> = x.iter().zip(d).map(|(u, v)| u + t * v).collect();
    normalize(&mut y, prob.r);
    Some((y, ft))
}

fn first_order_residual(g: &[f64], x: &[f64], value: f64, p: f64, r: f64) -> f64 {
    let vp = value.powf(p);
    g.iter()
        .zip(x)
        .map(|(gi, &xi)| (gi - vp * psi(r, xi)).abs())
        .fold(0.0, f64::max)
        / vp.max(1.0)
}

/// Monotone ascent `x <- psi_{r*}(A psi_p(A x))` for finite `1 < r, p`.
/// Stops at `max_iter`, when the residual reaches `kkt_tol`, when the
/// relative value change drops to `tol` (`0` disables this), or when the
/// residual has stopped improving. Every few steps a slowly contracting run
/// is pushed along its recent direction by a line search.
fn alternating(a: &SymmetricMatrix, prob: &NormProblem, x0: &[f64], tol: f64, kkt_tol: f64, max_iter: usize) -> Run {
    const WINDOW: usize = 10;
    let (r, p) = (prob.r, prob.p);
    let rs = prob.r_dual();
    let mut x = x0.to_vec();
    normalize(&mut x, r);
    let mut ax = a.matvec(&x);
    let mut value = lp_norm(&ax, p);
    let mut g = a.matvec(&psi_map(p, &ax));
    let mut residual = first_order_residual(&g, &x, value, p, r);
    let mut iterations = 0;
    let mut best_residual = residual;
    let mut stale = 0;
    let mut anchor = (x.clone(), residual);
    while iterations < max_iter && residual > kkt_tol && value > 0.0 {
        let mut next = psi_map(rs, &g);
        if normalize(&mut next, r) == 0.0 {
            break;
        }
        let mut next_ax = a.matvec(&next);
        let mut next_value = lp_norm(&next_ax, p);
        iterations += 1;
        // The map never lowers the value beyond rounding.
        if next_value < value * (1.0 - 1e-13) {
            break;
        }
        if iterations % WINDOW == 0 {
            if residual > 0.25 * anchor.1 {
                let d: Vec<f64> = next.iter().zip(&anchor.0).map(|(u, v)| u - v).collect();
                if let Some((y, fy)) = line_extrapolate(a, prob, &next, &d, next_value) {
                    next = y;
                    next_ax = a.matvec(&next);
                    next_value = fy.max(lp_norm(&next_ax, p));
                }
            }
            anchor = (next.clone(), residual);
        }
        let change = (next_value - value).abs() / next_value;
        x = next;
        ax = next_ax;
        value = next_value;
        g = a.matvec(&psi_map(p, &ax));
        residual = first_order_residual(&g, &x, value, p, r);
        if tol > 0.0 && change <= tol {
            break;
        }
        if residual < 0.5 * best_residual {
            best_residual = residual;
            stale = 0;
        } else {
            stale += 1;
            if stale >= 200 {
                break;
            }
        }
    }
    Run {
        value,
        x,
        residual,
        iterations,
    }
}

fn norm_certificate(a: &SymmetricMatrix, prob: &NormProblem, x: Vec<f64>, value: f64, method: Method) -> NormCertificate {
    let ax = a.matvec(&x);
    let mut y = if prob.p.is_infinite() {
        let (k, _) = ax
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (i, v)| if v.abs() > b.1 { (i, v.abs()) } else { b });
        let mut e = vec![0.0; ax.len()];
        if !e.is_empty() {
            e[k] = if ax[k] < 0.0 { -1.0 } else { 1.0 };
        }
        e
    } else if prob.p == 1.0 {
        ax.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect()
    } else {
        psi_map(prob.p, &ax)
    };
    normalize(&mut y, prob.p_dual());
    NormCertificate::new(value, x, Some(y), method)
}

/// `x` maximizing `z^T x` over the unit `l_r` ball.
fn dual_direction(z: &[f64], r: f64) -> Vec<f64> {
    let rs = super::problem::dual_exponent(r);
    let mut x = if rs.is_infinite() {
        // r = 1: all mass on the largest coordinate.
        let (k, _) = z
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (i, v)| if v.abs() > b.1 { (i, v.abs()) } else { b });
        let mut e = vec![0.0; z.len()];
        e[k] = if z[k] < 0.0 { -1.0 } else { 1.0 };
        e
    } else if rs == 1.0 {
        z.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect()
    } else {
        psi_map(rs, z)
    };
    normalize(&mut x, r);
    x
}

/// Exact values at the extreme exponents, when available.
fn extreme_exponents(a: &SymmetricMatrix, prob: &NormProblem) -> Result<Option<NormCertificate>, NormError> {
    let n = a.n();
    let (r, p) = (prob.r, prob.p);
    if r == 1.0 {
        // Extreme points of the l_1 ball are the signed basis vectors.
        let rows = a.rows();
        let (j, v) = rows
            .iter()
            .map(|c| lp_norm(c, p))
            .enumerate()
            .fold((0, -1.0), |b, (j, v)| if v > b.1 { (j, v) } else { b });
        let mut x = vec![0.0; n];
        x[j] = 1.0;
        return Ok(Some(norm_certificate(a, prob, x, v, Method::ClosedForm)));
    }
    if p.is_infinite() {
        let rows = a.rows();
        let rs = prob.r_dual();
        let (i, v) = rows
            .iter()
            .map(|c| lp_norm(c, rs))
            .enumerate()
            .fold((0, -1.0), |b, (i, v)| if v > b.1 { (i, v) } else { b });
        let x = dual_direction(&rows[i], r);
        let mut y = vec![0.0; n];
        y[i] = 1.0;
        return Ok(Some(NormCertificate::new(v, x, Some(y), Method::ClosedForm)));
    }
    if n <= EXACT_SPIN_LIMIT && r.is_infinite() {
        let (v, x) = gray_max(a, 1e-9, |_, h| lp_norm(h, p))?;
        return Ok(Some(norm_certificate(a, prob, x, v, Method::Hypercube)));
    }
    if n <= EXACT_SPIN_LIMIT && p == 1.0 {
        // |A|_{r->1} = max over sign vectors y of |A y|_{r*}.
        let rs = prob.r_dual();
        let (v, y) = gray_max(a, 1e-9, |_, h| lp_norm(h, rs))?;
        let x = dual_direction(&a.matvec(&y), r);
        let mut yn = y;
        normalize(&mut yn, f64::INFINITY);
        return Ok(Some(NormCertificate::new(v, x, Some(yn), Method::Hypercube)));
    }
    Ok(None)
}

/// Best of several monotone ascents for `|A|_{r->p}`: an all-ones start plus
/// Gaussian starts, `restarts` in total. Always a lower bound on the norm.
pub fn multistart_ascent(
    a: &SymmetricMatrix,
    prob: &NormProblem,
    restarts: usize,
    tol: f64,
    rng: &mut Rng,
) -> Result<NormCertificate, NormError> {
    multistart_ascent_seeded(a, prob, restarts, tol, rng, &[])
}

/// As [`multistart_ascent`], with extra caller-supplied starting vectors.
pub fn multistart_ascent_seeded(
    a: &SymmetricMatrix,
    prob: &NormProblem,
    restarts: usize,
    tol: f64,
    rng: &mut Rng,
    seeds: &[Vec<f64>],
) -> Result<NormCertificate, NormError> {
    let n = a.n();
    if n == 0 {
        return Ok(NormCertificate::new(0.0, vec![], Some(vec![]), Method::Ascent));
    }
    if let Some(c) = extreme_exponents(a, prob)? {
        return Ok(c);
    }
    if prob.is_finite_interior() {
        let run = best_run(a, prob, restarts, tol, rng, seeds);
        let mut c = norm_certificate(a, prob, run.x, run.value, Method::Ascent);
        c.kkt_residual = Some(run.residual);
        c.iterations = run.iterations;
        return Ok(c);
    }
    // Large n at an infinite r or unit p: smooth the exponent, then rescore
    // the maximizer under the true exponents.
    let smooth = NormProblem::new(
        if prob.r.is_infinite() { 1.0 / SMOOTHING_EPS } else { prob.r },
        if prob.p == 1.0 { 1.0 + SMOOTHING_EPS } else { prob.p },
    )?;
    let run = best_run(a, &smooth, restarts, tol, rng, seeds);
    let mut x = run.x;
    normalize(&mut x, prob.r);
    let exact = lp_norm(&a.matvec(&x), prob.p);
    let mut c = norm_certificate(a, prob, x, exact, Method::Ascent);
    c.iterations = run.iterations;
    c.smoothing_gap = Some(run.value - exact);
    Ok(c)
}

fn best_run(a: &SymmetricMatrix, prob: &NormProblem, restarts: usize, tol: f64, rng: &mut Rng, seeds: &[Vec<f64>]) -> Run {
    let n = a.n();
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(restarts.max(1) + seeds.len());
    starts.push(vec![1.0; n]);
    starts.extend(seeds.iter().filter(|s| s.len() == n && s.iter().any(|v| *v != 0.0)).cloned());
    for _ in 1..restarts.max(1) {
        starts.push(gaussian(n, rng));
    }
    let mut best: Option<Run> = None;
    let mut total = 0;
    for s in &starts {
        let run = alternating(a, prob, s, tol, 0.0, MAX_ITER);
        total += run.iterations;
        if best.as_ref().map_or(true, |b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let polished = if best.residual > POLISH_KKT {
        alternating(a, prob, &best.x, 0.0, POLISH_KKT, MAX_ITER)
    } else {
        best
    };
    Run {
        iterations: total + polished.iterations,
        ..polished
    }
}

/// `l_r`-Grothendieck value `max { x^T A x : |x|_r <= 1 }`.
///
/// `r = 2` is the top eigenvalue (floored at 0). `r = inf` enumerates the
/// cube for `n <= 20` (exact when the diagonal is nonnegative). Other `r`
/// run a damped fixed-point ascent with sign-flip refinement from several
/// starts, so the value is a lower bound.
pub fn grothendieck_value(a: &SymmetricMatrix, r: f64, restarts: usize, rng: &mut Rng) -> Result<NormCertificate, NormError> {
    grothendieck_value_seeded(a, r, restarts, rng, &[])
}

pub fn grothendieck_value_seeded(
    a: &SymmetricMatrix,
    r: f64,
    restarts: usize,
    rng: &mut Rng,
    seeds: &[Vec<f64>],
) -> Result<NormCertificate, NormError> {
    if !(r >= 1.0) {
        return Err(NormError::Unsupported(format!("exponent r = {r} below 1")));
    }
    let n = a.n();
    if n == 0 {
        return Ok(NormCertificate::new(0.0, vec![], None, Method::Eigen));
    }
    if r == 2.0 {
        let (lambda, x) = top_eigenpair(a);
        let mut c = NormCertificate::new(lambda.max(0.0), x, None, Method::Eigen);
        c.kkt_residual = Some(grothendieck_kkt_residual(a, 2.0, &c.x, lambda)?);
        return Ok(c);
    }
    if r.is_infinite() {
        return Ok(cube_value(a, restarts, rng, seeds)?);
    }

    let mut starts: Vec<Vec<f64>> = vec![vec![1.0; n]];
    if n >= 2 {
        starts.push(witness_vector(a, r)?);
    }
    starts.extend(seeds.iter().filter(|s| s.len() == n && s.iter().any(|v| *v != 0.0)).cloned());
    for _ in 1..restarts.max(1) {
        starts.push(gaussian(n, rng));
    }
    let work_r = if r == 1.0 { 1.0 + SMOOTHING_EPS } else { r };
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut total = 0;
    for s in &starts {
        let (v, x, it) = refined_fixed_point(a, work_r, s);
        total += it;
        if best.as_ref().map_or(true, |b| v > b.0) {
            best = Some((v, x, it));
        }
    }
    let (v, mut x, _) = best.expect("at least one start");
    let mut c = if r == 1.0 {
        normalize(&mut x, 1.0);
        let exact = a.quadratic_form(&x);
        let mut c = NormCertificate::new(exact.max(0.0), x, None, Method::Ascent);
        c.smoothing_gap = Some(v - exact);
        c
    } else {
        let mut c = NormCertificate::new(v.max(0.0), x, None, Method::Ascent);
        c.kkt_residual = Some(grothendieck_kkt_residual(a, r, &c.x, v)?);
        c
    };
    c.iterations = total;
    Ok(c)
}

fn top_eigenpair(a: &SymmetricMatrix) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(a.to_dense());
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |b, (i, v)| if *v > *b.1 { (i, v) } else { b });
    let x: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    (lambda, x)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(a: &SymmetricMatrix) -> f64 {
    if a.n() == 0 {
        return 0.0;
    }
    top_eigenpair(a).0
}

/// `|A|_{2->2}` with its top singular vector, from the symmetric
/// eigendecomposition.
pub fn spectral_norm(a: &SymmetricMatrix) -> NormCertificate {
    if a.n() == 0 {
        return NormCertificate::new(0.0, vec![], Some(vec![]), Method::Eigen);
    }
    let eig = SymmetricEigen::new(a.to_dense());
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |b, (i, v)| if v.abs() > b.1.abs() { (i, *v) } else { b });
    let x: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let y: Vec<f64> = x.iter().map(|v| v * lambda.signum()).collect();
    let mut c = NormCertificate::new(lambda.abs(), x, Some(y), Method::Eigen);
    let prob = NormProblem::new(2.0, 2.0).expect("valid exponents");
    c.kkt_residual = kkt_residual(a, &prob, &c.x, c.value).ok();
    c
}

/// Damped ascent `x <- psi_{r*}(A x + sigma psi_r(x))` on the unit `l_r`
/// sphere. `sigma` grows whenever an undamped step would lower `x^T A x`
/// and shrinks again after accepted steps.
fn damped_fixed_point(a: &SymmetricMatrix, r: f64, x0: &[f64]) -> (f64, Vec<f64>, usize) {
    let rs = super::problem::dual_exponent(r);
    let mut x = x0.to_vec();
    if normalize(&mut x, r) == 0.0 {
        return (0.0, x, 0);
    }
    let mut g = a.matvec(&x);
    let mut value = dot(&x, &g);
    let mut sigma = 0.0f64;
    let mut it = 0;
    while it < MAX_ITER {
        let pr = psi_map(r, &x);
        let scale = lp_norm(&g, rs).max(value.abs()).max(f64::MIN_POSITIVE);
        let res = g
            .iter()
            .zip(&pr)
            .map(|(gi, pi)| (gi - value * pi).abs())
            .fold(0.0, f64::max)
            / value.abs().max(1.0);
        if res <= POLISH_KKT {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let z: Vec<f64> = g.iter().zip(&pr).map(|(gi, pi)| gi + sigma * pi).collect();
            let mut next = psi_map(rs, &z);
            if normalize(&mut next, r) == 0.0 {
                sigma = if sigma == 0.0 { scale } else { 2.0 * sigma };
                continue;
            }
            let ng = a.matvec(&next);
            let nv = dot(&next, &ng);
            if nv >= value {
                accepted = Some((next, ng, nv));
                break;
            }
            sigma = if sigma == 0.0 { scale } else { 2.0 * sigma };
        }
        it += 1;
        let Some((next, ng, nv)) = accepted else { break };
        let change = (nv - value) / nv.abs().max(f64::MIN_POSITIVE);
        x = next;
        g = ng;
        value = nv;
        sigma = if sigma < 1e-3 * scale { 0.0 } else { sigma / 4.0 };
        if change <= 1e-15 && sigma == 0.0 {
            break;
        }
    }
    (value, x, it)
}

/// [`damped_fixed_point`] followed by sign-flip and zeroing moves that the
/// fixed point alone cannot make; repeats while a move helps.
fn refined_fixed_point(a: &SymmetricMatrix, r: f64, x0: &[f64]) -> (f64, Vec<f64>, usize) {
    let (mut value, mut x, mut it) = damped_fixed_point(a, r, x0);
    for _ in 0..a.n().max(4) {
        let g = a.matvec(&x);
        // Flipping x_i changes x^T A x by -4 x_i (g_i - a_ii x_i).
        let mut best_gain = 1e-14 * value.abs();
        let mut candidate = None;
        for i in 0..x.len() {
            let gain = -4.0 * x[i] * (g[i] - a.get(i, i) * x[i]);
            if gain > best_gain {
                best_gain = gain;
                let mut y = x.clone();
                y[i] = -y[i];
                candidate = Some(y);
            }
            if x[i] != 0.0 {
                let mut y = x.clone();
                y[i] = 0.0;
                if normalize(&mut y, r) > 0.0 {
                    let gain = a.quadratic_form(&y) - value;
                    if gain > best_gain {
                        best_gain = gain;
                        candidate = Some(y);
                    }
                }
            }
        }
        let Some(y) = candidate else { break };
        let (v2, x2, it2) = damped_fixed_point(a, r, &y);
        it += it2;
        if v2 <= value {
            break;
        }
        value = v2;
        x = x2;
    }
    (value, x, it)
}

/// `r = inf`: exact cube enumeration for small `n`, sign local search above,
/// then coordinate polishing inside the box when the diagonal has negative
/// entries (vertices need not be optimal then).
fn cube_value(a: &SymmetricMatrix, restarts: usize, rng: &mut Rng, seeds: &[Vec<f64>]) -> Result<NormCertificate, NormError> {
    let n = a.n();
    let negative_diag = (0..n).any(|i| a.get(i, i) < 0.0);
    let (mut value, mut x, mut method) = if n <= EXACT_SPIN_LIMIT {
        let (v, x) = hypercube_max(a)?;
        (v, x, Method::Hypercube)
    } else {
        let mut starts: Vec<Vec<f64>> = vec![vec![1.0; n]];
        starts.extend(seeds.iter().filter(|s| s.len() == n).cloned());
        for _ in 1..restarts.max(1) {
            starts.push(gaussian(n, rng));
        }
        let mut best = (f64::NEG_INFINITY, vec![]);
        for s in starts {
            let (v, x) = sign_local_search(a, &s);
            if v > best.0 {
                best = (v, x);
            }
        }
        (best.0, best.1, Method::Ascent)
    };
    if negative_diag {
        let (v, y) = box_coordinate_ascent(a, x.clone());
        if v > value {
            value = v;
            x = y;
        }
        method = Method::Ascent;
    }
    Ok(NormCertificate::new(value.max(0.0), x, None, method))
}

fn sign_local_search(a: &SymmetricMatrix, start: &[f64]) -> (f64, Vec<f64>) {
    let mut x: Vec<f64> = start.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut h = a.matvec(&x);
    loop {
        let mut best = (0.0, usize::MAX);
        for k in 0..x.len() {
            let gain = -4.0 * x[k] * (h[k] - a.get(k, k) * x[k]);
            if gain > best.0 {
                best = (gain, k);
            }
        }
        if best.1 == usize::MAX || best.0 <= 1e-14 * dot(&x, &h).abs() {
            break;
        }
        let k = best.1;
        for (i, hi) in h.iter_mut().enumerate() {
            *hi -= 2.0 * x[k] * a.get(i, k);
        }
        x[k] = -x[k];
    }
    (a.quadratic_form(&x), x)
}

fn box_coordinate_ascent(a: &SymmetricMatrix, mut x: Vec<f64>) -> (f64, Vec<f64>) {
    for _ in 0..1000 {
        let mut moved = 0.0f64;
        for i in 0..x.len() {
            let d = a.get(i, i);
            let c: f64 = (0..x.len()).filter(|&j| j != i).map(|j| a.get(i, j) * x[j]).sum();
            // f(t) = d t^2 + 2 c t on [-1, 1].
            let f = |t: f64| d * t * t + 2.0 * c * t;
            let mut best = x[i];
            for t in [-1.0, 1.0, if d < 0.0 { (-c / d).clamp(-1.0, 1.0) } else { x[i] }] {
                if f(t) > f(best) {
                    best = t;
                }
            }
            moved = moved.max((best - x[i]).abs());
            x[i] = best;
        }
        if moved <= 1e-15 {
            break;
        }
    }
    (a.quadratic_form(&x), x)
}
