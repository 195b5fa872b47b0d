use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{MatError, SymmetricMatrix};

/// Symmetric sparse matrix as a coordinate list over `i <= j`, sorted by `(i, j)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseEntries {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseEntries {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    /// Entries may be given in any order and with `i > j`; they are
    /// normalized to `i <= j` and sorted.
    pub fn new(n: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self, MatError> {
        let mut out: Vec<_> = entries
            .into_iter()
            .map(|(i, j, v)| if i <= j { (i, j, v) } else { (j, i, v) })
            .collect();
        for &(i, j, v) in &out {
            if j >= n {
                return Err(MatError::Shape(format!("entry ({i}, {j}) outside n = {n}")));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(MatError::Shape(format!("entry ({i}, {j}) has value {v}")));
            }
        }
        out.sort_by_key(|&(i, j, _)| (i, j));
        if out.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(MatError::Shape("duplicate coordinate".into()));
        }
        Ok(Self { n, entries: out })
    }

    /// Already-sorted entries from a trusted producer.
    pub(crate) fn from_sorted(n: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_symmetric(&self) -> SymmetricMatrix {
        let mut a = SymmetricMatrix::zeros(self.n);
        for &(i, j, v) in &self.entries {
            a.set(i, j, v);
        }
        a
    }

    pub fn abs_row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            s[i] += v.abs();
            if i != j {
                s[j] += v.abs();
            }
        }
        s
    }

    /// Nonzeros in each row of the full symmetric matrix.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for &(i, j, _) in &self.entries {
            c[i] += 1;
            if i != j {
                c[j] += 1;
            }
        }
        c
    }

    /// `n`, then one `i j value` line per stored entry.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(i, j, v) in &self.entries {
            writeln!(s, "{i} {j} {v:?}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MatError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n = lines
            .next()
            .ok_or_else(|| MatError::Parse("empty sparse file".into()))?
            .trim()
            .parse()
            .map_err(|e| MatError::Parse(format!("dimension: {e}")))?;
        let mut entries = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || MatError::Parse(format!("bad sparse line {line:?}"));
            if f.len() != 3 {
                return Err(bad());
            }
            let i = f[0].parse().map_err(|_| bad())?;
            let j = f[1].parse().map_err(|_| bad())?;
            let v = f[2].parse().map_err(|_| bad())?;
            entries.push((i, j, v));
        }
        Self::new(n, entries)
    }

    pub fn write_text(&self, path: &Path) -> Result<(), MatError> {
        std::fs::write(path, self.to_text()).map_err(|e| MatError::io(path, e))
    }
}

/// Matrix whose only nonzeros are `w_k` at `(2k, 2k+1)` and `(2k+1, 2k)`
/// (0-based), with `|w_0| >= |w_1| >= ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedSparseMatrix {
    n: usize,
    pairs: Vec<f64>,
}

impl PairedSparseMatrix {
    pub fn new(n: usize, pairs: Vec<f64>) -> Result<Self, MatError> {
        if 2 * pairs.len() > n {
            return Err(MatError::Shape(format!(
                "{} pairs do not fit in dimension {n}",
                pairs.len()
            )));
        }
        if pairs.windows(2).any(|w| w[0].abs() < w[1].abs()) {
            return Err(MatError::Shape("pair magnitudes must be nonincreasing".into()));
        }
        if pairs.iter().any(|w| !w.is_finite()) {
            return Err(MatError::Shape("pair values must be finite".into()));
        }
        Ok(Self { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[f64] {
        &self.pairs
    }

    pub fn to_symmetric(&self) -> SymmetricMatrix {
        let mut a = SymmetricMatrix::zeros(self.n);
        for (k, &w) in self.pairs.iter().enumerate() {
            a.set(2 * k, 2 * k + 1, w);
        }
        a
    }
}

/// Result of [`compact_large`].
#[derive(Clone, Debug, PartialEq)]
pub struct Compaction {
    pub paired: PairedSparseMatrix,
    /// Simultaneous row/column transpositions, applied in order.
    pub swaps: Vec<(usize, usize)>,
    /// `paired[s][t] = input[permutation[s]][permutation[t]]`.
    pub permutation: Vec<usize>,
}

/// Moves the nonzeros of a matrix with zero diagonal and at most one nonzero
/// per row into adjacent slot pairs, largest magnitude first, by a sequence
/// of simultaneous row/column transpositions.
pub fn compact_large(l: &SparseEntries) -> Result<Compaction, MatError> {
    let n = l.n();
    let mut used = HashSet::new();
    for &(i, j, _) in l.entries() {
        if i == j {
            return Err(MatError::NotPairable(format!("diagonal entry at {i}")));
        }
        for k in [i, j] {
            if !used.insert(k) {
                return Err(MatError::NotPairable(format!(
                    "row {k} holds more than one nonzero"
                )));
            }
        }
    }

    // Selection order: largest magnitude, then smallest original position.
    let mut order: Vec<(usize, usize, f64)> = l.entries().to_vec();
    order.sort_by(|a, b| {
        b.2.abs()
            .total_cmp(&a.2.abs())
            .then((a.0, a.1).cmp(&(b.0, b.1)))
    });

    let mut at_slot: Vec<usize> = (0..n).collect();
    let mut slot_of: Vec<usize> = (0..n).collect();
    let mut swaps = Vec::new();
    let mut swap = |s: usize, t: usize, at_slot: &mut Vec<usize>, slot_of: &mut Vec<usize>| {
        if s != t {
            at_slot.swap(s, t);
            slot_of[at_slot[s]] = s;
            slot_of[at_slot[t]] = t;
            swaps.push((s, t));
        }
    };
    for (k, &(a, b, _)) in order.iter().enumerate() {
        let (mut i, mut j) = (slot_of[a], slot_of[b]);
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        let partner = at_slot[j];
        swap(2 * k, i, &mut at_slot, &mut slot_of);
        swap(2 * k + 1, slot_of[partner], &mut at_slot, &mut slot_of);
    }
    let pairs = order.iter().map(|e| e.2).collect();
    Ok(Compaction {
        paired: PairedSparseMatrix::new(n, pairs)?,
        swaps,
        permutation: at_slot,
    })
}
