//! Brute-force references for tiny matrices. Deliberately shares no search
//! code with the solvers it is used to check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::problem::{lp_norm, psi};
use super::{NormError, NormProblem};
use crate::dist::Rng;
use crate::mat::SymmetricMatrix;

pub const ORACLE_MAX_N: usize = 6;
const SCREEN_STARTS: usize = 250;
const SCREEN_ITERS: usize = 60;
const REFINE_TOP: usize = 8;
const REFINE_ITERS: usize = 4000;
const AGREEMENT: f64 = 1e-8;
const ORACLE_SEED: u64 = 0x5eed_0bac1e;

fn check_size(n: usize) -> Result<(), NormError> {
    if n > ORACLE_MAX_N {
        Err(NormError::Refused(format!(
            "oracle is limited to n <= {ORACLE_MAX_N}, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Row-major copy of the full matrix.
fn dense_rows(a: &SymmetricMatrix) -> Vec<Vec<f64>> {
    let n = a.n();
    (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect()
}

fn mul(rows: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
}

/// All `2^n` sign vectors.
fn sign_vectors(n: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..1u32 << n).map(move |m| (0..n).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
}

/// `|A|_{r->p}` for `n <= 6`.
///
/// Exact for `r = p = 2` (singular values), `r = 1` and `p = inf` (basis
/// vectors), and `r = inf` or `p = 1` (all sign vectors). Otherwise a dense
/// multistart gradient search on `|Ax|_p / |x|_r`, accepted only when the
/// two best refined starts agree to `1e-8`.
pub fn oracle_norm_small(a: &SymmetricMatrix, prob: &NormProblem) -> Result<f64, NormError> {
    let n = a.n();
    check_size(n)?;
    if n == 0 {
        return Ok(0.0);
    }
    let d = a.to_dense();
    let (r, p) = (prob.r, prob.p);
    if r == 2.0 && p == 2.0 {
        return Ok(d.clone().svd(false, false).singular_values.max());
    }
    if r == 1.0 {
        return Ok((0..n).map(|j| lp_norm(d.column(j).as_slice(), p)).fold(0.0, f64::max));
    }
    if p.is_infinite() {
        let rs = prob.r_dual();
        return Ok((0..n)
            .map(|i| lp_norm(&d.row(i).iter().copied().collect::<Vec<_>>(), rs))
            .fold(0.0, f64::max));
    }
    let rows = dense_rows(a);
    if r.is_infinite() {
        return Ok(sign_vectors(n).map(|x| lp_norm(&mul(&rows, &x), p)).fold(0.0, f64::max));
    }
    if p == 1.0 {
        // A is symmetric, so A^T y = A y.
        let rs = prob.r_dual();
        return Ok(sign_vectors(n).map(|y| lp_norm(&mul(&rows, &y), rs)).fold(0.0, f64::max));
    }
    let f = |x: &[f64]| lp_norm(&mul(&rows, x), p) / lp_norm(x, r);
    let grad = |x: &[f64]| {
        // Gradient of |Ax|_p / |x|_r at a unit-l_r point.
        let ax = mul(&rows, x);
        let val = lp_norm(&ax, p);
        if val == 0.0 {
            return vec![0.0; x.len()];
        }
        let w: Vec<f64> = ax.iter().map(|&t| psi(p, t / val)).collect();
        let g = mul(&rows, &w);
        g.iter().zip(x).map(|(gi, &xi)| gi - val * psi(r, xi)).collect()
    };
    search(n, r, f, grad)
}

/// `max { x^T A x : |x|_r <= 1 }` for `n <= 6`.
///
/// Exact for `r = 2` (eigenvalues) and `r = inf` (every face of the cube:
/// each coordinate is pinned to `-1`, `+1`, or left free and solved for).
/// Otherwise the same accepted multistart search as [`oracle_norm_small`].
pub fn oracle_grothendieck_small(a: &SymmetricMatrix, r: f64) -> Result<f64, NormError> {
    let n = a.n();
    check_size(n)?;
    if n == 0 {
        return Ok(0.0);
    }
    if r == 2.0 {
        return Ok(SymmetricEigen::new(a.to_dense()).eigenvalues.max().max(0.0));
    }
    let rows = dense_rows(a);
    if r.is_infinite() {
        return Ok(cube_faces(&rows));
    }
    let f = |x: &[f64]| {
        let ax = mul(&rows, x);
        let q: f64 = ax.iter().zip(x).map(|(u, v)| u * v).sum();
        q / lp_norm(x, r).powi(2)
    };
    let grad = |x: &[f64]| {
        let ax = mul(&rows, x);
        let q: f64 = ax.iter().zip(x).map(|(u, v)| u * v).sum();
        ax.iter().zip(x).map(|(g, &xi)| 2.0 * g - 2.0 * q * psi(r, xi)).collect()
    };
    Ok(search(n, r, f, grad)?.max(0.0))
}

fn cube_faces(d: &[Vec<f64>]) -> f64 {
    let n = d.len();
    let mut best = 0.0f64;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        // digit 0: free, 1: +1, 2: -1
        let mut c = code;
        let mut pinned = vec![None; n];
        for slot in pinned.iter_mut() {
            *slot = match c % 3 {
                1 => Some(1.0),
                2 => Some(-1.0),
                _ => None,
            };
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| pinned[i].is_none()).collect();
        let mut x: Vec<f64> = pinned.iter().map(|s| s.unwrap_or(0.0)).collect();
        if !free.is_empty() {
            // Stationarity in the free block: A_FF x_F = -A_FB x_B.
            let k = free.len();
            let aff = DMatrix::from_fn(k, k, |s, t| d[free[s]][free[t]]);
            let rhs = DVector::from_fn(k, |s, _| {
                -(0..n)
                    .filter(|j| pinned[*j].is_some())
                    .map(|j| d[free[s]][j] * x[j])
                    .sum::<f64>()
            });
            let Some(sol) = aff.lu().solve(&rhs) else { continue };
            if sol.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
                continue;
            }
            for (s, &i) in free.iter().enumerate() {
                x[i] = sol[s].clamp(-1.0, 1.0);
            }
        }
        let v: f64 = mul(d, &x).iter().zip(&x).map(|(u, w)| u * w).sum();
        best = best.max(v);
    }
    best
}

fn unit(mut x: Vec<f64>, r: f64) -> Vec<f64> {
    let s = lp_norm(&x, r);
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
    x
}

/// Armijo gradient steps on the sphere, starting step `t`.
fn climb(x: &mut Vec<f64>, t: &mut f64, iters: usize, r: f64, f: &impl Fn(&[f64]) -> f64, grad: &impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let mut fx = f(x);
    for _ in 0..iters {
        let g = grad(x);
        let gn: f64 = g.iter().map(|v| v * v).sum();
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let mut accepted = false;
        for _ in 0..50 {
            let y = unit(x.iter().zip(&g).map(|(a, b)| a + *t * b).collect(), r);
            let fy = f(&y);
            if fy >= fx + 1e-4 * *t * gn {
                *x = y;
                fx = fy;
                *t *= 2.0;
                accepted = true;
                break;
            }
            *t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    fx
}

/// Coordinate pattern search at shrinking step sizes, including moves that
/// zero a coordinate.
fn pattern(x: &mut Vec<f64>, r: f64, f: &impl Fn(&[f64]) -> f64) -> f64 {
    let n = x.len();
    let mut fx = f(x);
    let mut step = 1e-2;
    while step >= 1e-13 {
        for _ in 0..200 {
            let mut improved = false;
            for i in 0..n {
                let base = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for cand in [x[i] + step * base, x[i] - step * base, 0.0] {
                    let mut y = x.clone();
                    y[i] = cand;
                    let y = unit(y, r);
                    if y.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    let fy = f(&y);
                    if fy > fx {
                        *x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step /= 10.0;
    }
    fx
}

fn search(n: usize, r: f64, f: impl Fn(&[f64]) -> f64, grad: impl Fn(&[f64]) -> Vec<f64>) -> Result<f64, NormError> {
    let mut rng = Rng::new(ORACLE_SEED).split(n as u64);
    let mut screened: Vec<(f64, Vec<f64>, f64)> = (0..SCREEN_STARTS)
        .map(|k| {
            let raw: Vec<f64> = if k < n {
                (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()
            } else {
                (0..n).map(|_| rng.normal()).collect()
            };
            let mut x = unit(raw, r);
            let mut t = 0.1;
            let v = climb(&mut x, &mut t, SCREEN_ITERS, r, &f, &grad);
            (v, x, t)
        })
        .collect();
    screened.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut refined: Vec<f64> = screened
        .into_iter()
        .take(REFINE_TOP)
        .map(|(_, mut x, mut t)| {
            climb(&mut x, &mut t, REFINE_ITERS, r, &f, &grad);
            pattern(&mut x, r, &f)
        })
        .collect();
    refined.sort_by(|a, b| b.total_cmp(a));
    let (v1, v2) = (refined[0], refined[1]);
    if (v1 - v2).abs() <= AGREEMENT * v1.abs().max(1e-300) {
        Ok(v1)
    } else {
        Err(NormError::OracleDisagreement { best: v1, second: v2 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[Vec<f64>]) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn exact_examples() {
        let d = m(&[vec![3.0, 0.0], vec![0.0, 4.0]]);
        assert_relative_eq!(oracle_norm_small(&d, &NormProblem::new(2.0, 2.0).unwrap()).unwrap(), 4.0, max_relative = 1e-14);
        let s = m(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(oracle_norm_small(&s, &NormProblem::new(f64::INFINITY, 1.0).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn searched_rank_one() {
        let ones = m(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let v = oracle_norm_small(&ones, &NormProblem::new(4.0, 2.0).unwrap()).unwrap();
        assert_relative_eq!(v, 2f64.powf(1.25), max_relative = 1e-10);
    }

    #[test]
    fn grothendieck_single_pair() {
        let s = m(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_relative_eq!(oracle_grothendieck_small(&s, 4.0).unwrap(), 2f64.sqrt(), max_relative = 1e-10);
        assert_eq!(oracle_grothendieck_small(&s, f64::INFINITY).unwrap(), 2.0);
        let neg = m(&[vec![-4.0, 1.0], vec![1.0, 0.0]]);
        assert_relative_eq!(oracle_grothendieck_small(&neg, f64::INFINITY).unwrap(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn refuses_large() {
        let z = SymmetricMatrix::zeros(7);
        assert!(matches!(
            oracle_norm_small(&z, &NormProblem::new(3.0, 2.0).unwrap()),
            Err(NormError::Refused(_))
        ));
    }
}
