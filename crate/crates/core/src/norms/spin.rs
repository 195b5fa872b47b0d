use super::NormError;
use crate::mat::SymmetricMatrix;

pub const EXACT_SPIN_LIMIT: usize = 20;

fn refuse_large(n: usize) -> Result<(), NormError> {
    if n > EXACT_SPIN_LIMIT {
        Err(NormError::Refused(format!(
            "exact enumeration limited to n <= {EXACT_SPIN_LIMIT}, got {n}"
        )))
    } else {
        Ok(())
    }
}

fn signs_from_mask(n: usize, mask: u64) -> Vec<f64> {
    (0..n)
        .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
        .collect()
}

/// `max_{x in {-1,1}^n} x^T A x` by direct evaluation of every sign vector
/// with `x_0 = 1`.
pub fn ground_state(a: &SymmetricMatrix) -> Result<f64, NormError> {
    Ok(ground_state_argmax(a)?.0)
}

pub fn ground_state_argmax(a: &SymmetricMatrix) -> Result<(f64, Vec<f64>), NormError> {
    let n = a.n();
    refuse_large(n)?;
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for half in 0..1u64 << (n - 1) {
        let x = signs_from_mask(n, half << 1);
        let v = a.quadratic_form(&x);
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// Ground state written as `trace(A) + ground_state(A - diag A)`; on sign
/// vectors the diagonal contributes its trace whatever the signs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundSplit {
    pub trace: f64,
    pub off_diagonal: f64,
}

impl GroundSplit {
    pub fn total(&self) -> f64 {
        self.trace + self.off_diagonal
    }
}

pub fn ground_state_split(a: &SymmetricMatrix) -> Result<GroundSplit, NormError> {
    Ok(GroundSplit {
        trace: a.trace(),
        off_diagonal: ground_state(&a.without_diagonal())?,
    })
}

/// Walks all sign vectors with `x_0 = 1` in Gray-code order keeping `h = A x`
/// current, and returns the largest `score(x, h)` with its `x`. Scores within
/// `rel_tie` of the running best are kept and rescored from a fresh product at
/// the end, so rounding drift in `h` cannot pick the wrong vertex.
pub(crate) fn gray_max(
    a: &SymmetricMatrix,
    rel_tie: f64,
    mut score: impl FnMut(&[f64], &[f64]) -> f64,
) -> Result<(f64, Vec<f64>), NormError> {
    let n = a.n();
    refuse_large(n)?;
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    let mut x = vec![1.0; n];
    let mut h = a.matvec(&x);
    let mut best = score(&x, &h);
    let mut ties: Vec<Vec<f64>> = vec![x.clone()];
    let steps = 1u64 << (n - 1);
    for step in 1..steps {
        // Coordinate 1 + (index of lowest set bit) flips; x_0 stays fixed.
        let k = 1 + step.trailing_zeros() as usize;
        let two_xk = 2.0 * x[k];
        for (hi, c) in h.iter_mut().zip(&cols[k]) {
            *hi -= two_xk * c;
        }
        x[k] = -x[k];
        if step % 1024 == 0 {
            h = a.matvec(&x);
        }
        let v = score(&x, &h);
        let tol = rel_tie * best.abs().max(f64::MIN_POSITIVE);
        if v > best + tol {
            best = v;
            ties.retain(|_| false);
            ties.push(x.clone());
        } else if v >= best - tol {
            if v > best {
                best = v;
            }
            ties.push(x.clone());
        }
    }
    let mut out = (f64::NEG_INFINITY, Vec::new());
    for t in ties {
        let h = a.matvec(&t);
        let v = score(&t, &h);
        if v > out.0 {
            out = (v, t);
        }
    }
    Ok(out)
}

/// Maximum of `x^T A x` over sign vectors via [`gray_max`]; the value is a
/// fresh `quadratic_form` at the winning vertex.
pub fn hypercube_max(a: &SymmetricMatrix) -> Result<(f64, Vec<f64>), NormError> {
    let (_, x) = gray_max(a, 1e-9, |x, h| x.iter().zip(h).map(|(u, v)| u * v).sum())?;
    if x.is_empty() {
        return Ok((0.0, x));
    }
    Ok((a.quadratic_form(&x), x))
}

/// `x^T A x` at `x = 2^{-1/r}(e_i + sgn(a_ij) e_j)`, where `(i, j)` holds the
/// largest off-diagonal magnitude.
pub fn grothendieck_lower_witness(a: &SymmetricMatrix, r: f64) -> Result<f64, NormError> {
    let (i, j, v) = largest_off_diagonal(a)?;
    let w = 2f64.powf(1.0 - 2.0 / r) * v.abs() + 2f64.powf(-2.0 / r) * (a.get(i, i) + a.get(j, j));
    Ok(w)
}

/// The witness vector itself, unit in `l_r`.
pub fn witness_vector(a: &SymmetricMatrix, r: f64) -> Result<Vec<f64>, NormError> {
    let (i, j, v) = largest_off_diagonal(a)?;
    let c = 2f64.powf(-1.0 / r);
    let mut x = vec![0.0; a.n()];
    x[i] = c;
    x[j] = if v < 0.0 { -c } else { c };
    Ok(x)
}

/// Position and value of the largest `|a_ij|`, `i < j`, ties lexicographic.
pub fn largest_off_diagonal(a: &SymmetricMatrix) -> Result<(usize, usize, f64), NormError> {
    let n = a.n();
    if n < 2 {
        return Err(NormError::Unsupported("needs n >= 2".into()));
    }
    let mut best = (0, 1, a.get(0, 1));
    for i in 0..n {
        for j in i + 1..n {
            if a.get(i, j).abs() > best.2.abs() {
                best = (i, j, a.get(i, j));
            }
        }
    }
    Ok(best)
}
