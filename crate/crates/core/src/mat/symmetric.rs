use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::MatError;
use crate::dist::{DistError, HeavyTailLaw, Rng};

/// Dense symmetric matrix stored as its packed upper triangle, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    upper: Vec<f64>,
    /// Stream id of the generator that produced the matrix, if sampled.
    pub seed: Option<u64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * (n + 1) / 2],
            seed: None,
        }
    }

    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self, MatError> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(MatError::Shape(format!(
                "{} upper-triangular values given for n = {n}, expected {}",
                upper.len(),
                n * (n + 1) / 2
            )));
        }
        Ok(Self {
            n,
            upper,
            seed: None,
        })
    }

    /// Builds from `f(i, j)` evaluated for `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        Self {
            n,
            upper,
            seed: None,
        }
    }

    /// From a list of rows; the matrix must be exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MatError::Shape("rows must form a square matrix".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j].to_bits() != rows[j][i].to_bits() {
                    return Err(MatError::Shape(format!("entry ({i}, {j}) breaks symmetry")));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self, MatError> {
        let rows: Vec<Vec<f64>> = (0..a.nrows())
            .map(|i| a.row(i).iter().copied().collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        let mut k = 0;
        for i in 0..n {
            let d = self.upper[k];
            y[i] += d * x[i];
            k += 1;
            for j in i + 1..n {
                let a = self.upper[k];
                y[i] += a * x[j];
                y[j] += a * x[i];
                k += 1;
            }
        }
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            upper: self.upper.iter().map(|v| c * v).collect(),
            seed: self.seed,
        }
    }

    /// `B[s][t] = A[perm[s]][perm[t]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        Self::from_fn(self.n, |s, t| self.get(perm[s], perm[t]))
    }

    /// Sums of absolute values along each row.
    pub fn abs_row_sums(&self) -> Vec<f64> {
        let n = self.n;
        let mut s = vec![0.0; n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let a = self.upper[k].abs();
                s[i] += a;
                if j != i {
                    s[j] += a;
                }
                k += 1;
            }
        }
        s
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn without_diagonal(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.set(i, i, 0.0);
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        self.upper.iter().all(|&v| v >= 0.0)
    }

    /// Plain-text form: `n`, then the packed upper triangle one value per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(24 * (self.upper.len() + 1));
        writeln!(s, "{}", self.n).unwrap();
        for v in &self.upper {
            writeln!(s, "{v:?}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MatError> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| MatError::Parse("empty matrix file".into()))?
            .parse()
            .map_err(|e| MatError::Parse(format!("dimension: {e}")))?;
        let upper = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| MatError::Parse(format!("value {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_upper(n, upper)
    }

    pub fn write_text(&self, path: &Path) -> Result<(), MatError> {
        std::fs::write(path, self.to_text()).map_err(|e| MatError::io(path, e))
    }

    pub fn read_text(path: &Path) -> Result<Self, MatError> {
        let text = std::fs::read_to_string(path).map_err(|e| MatError::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Symmetric matrix with i.i.d. upper-triangular entries, drawn row-major.
pub fn sample_matrix(law: &HeavyTailLaw, n: usize, rng: &mut Rng) -> Result<SymmetricMatrix, DistError> {
    let sampler = law.sampler()?;
    let mut a = SymmetricMatrix::from_fn(n, |_, _| sampler.sample(rng));
    a.seed = Some(rng.stream());
    Ok(a)
}

/// Largest `|a_ij|` with its position `(i, j)`, `i <= j`; ties go to the
/// lexicographically smallest position.
pub fn max_abs_entry(a: &SymmetricMatrix) -> (f64, usize, usize) {
    let mut best = (a.get(0, 0).abs(), 0, 0);
    for i in 0..a.n() {
        for j in i..a.n() {
            let v = a.get(i, j).abs();
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    best
}

/// Number of stored entries (`i <= j`) with `|a_ij| > threshold`.
pub fn count_exceeding(a: &SymmetricMatrix, threshold: f64) -> usize {
    a.upper().iter().filter(|v| v.abs() > threshold).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_index_covers_triangle() {
        let n = 5;
        let mut seen = vec![false; n * (n + 1) / 2];
        for i in 0..n {
            for j in i..n {
                let k = packed_index(n, i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, packed_index(n, j, i));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut rng = Rng::new(3);
        let a = sample_matrix(&HeavyTailLaw::pareto(0.7), 6, &mut rng).unwrap();
        let b = SymmetricMatrix::from_text(&a.to_text()).unwrap();
        assert_eq!(a.upper(), b.upper());
    }

    #[test]
    fn sample_is_deterministic() {
        let law = HeavyTailLaw::pareto(1.0);
        let a = sample_matrix(&law, 7, &mut Rng::new(9)).unwrap();
        let b = sample_matrix(&law, 7, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
        let one = sample_matrix(&law, 1, &mut Rng::new(9)).unwrap();
        assert_eq!(one.upper().len(), 1);
        assert_eq!(one.get(0, 0), a.get(0, 0));
    }

    #[test]
    fn max_entry_examples() {
        let a = SymmetricMatrix::from_rows(&[vec![0.0, -5.0], vec![-5.0, 2.0]]).unwrap();
        assert_eq!(max_abs_entry(&a), (5.0, 0, 1));
        let b = SymmetricMatrix::from_rows(&[vec![3.0]]).unwrap();
        assert_eq!(max_abs_entry(&b), (3.0, 0, 0));
        assert_eq!(max_abs_entry(&SymmetricMatrix::zeros(3)), (0.0, 0, 0));
    }

    #[test]
    fn matvec_matches_dense() {
        let a = sample_matrix(&HeavyTailLaw::pareto(1.5), 5, &mut Rng::new(1)).unwrap();
        let x = [0.3, -1.0, 2.0, 0.5, -0.25];
        let dense = a.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for (u, v) in a.matvec(&x).iter().zip(dense.iter()) {
            assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn asymmetric_rows_rejected() {
        assert!(SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(SymmetricMatrix::from_text("2\n1\n2\n").is_err());
    }
}
