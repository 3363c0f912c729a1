//! Sparse symmetric matrices in compressed-column form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A sparse symmetric matrix.
///
/// Both triangles are stored in compressed-column form with row indices
/// sorted inside each column, so column `j` lists every nonzero `A[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds a matrix from `(row, col, value)` entries with symmetric completion.
    ///
    /// An entry given in one orientation only is mirrored. When both `(i, j)`
    /// and `(j, i)` are given they must agree; repeated entries in the same
    /// orientation are summed.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut lower: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(r, c, v) in entries {
            if r >= n || c >= n {
                return Err(Error::DimensionMismatch { expected: n, found: r.max(c) + 1 });
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite entry at ({r}, {c})")));
            }
            if r >= c {
                *lower.entry((r, c)).or_default() += v;
            } else {
                *upper.entry((c, r)).or_default() += v;
            }
        }
        let mut merged = lower;
        for (key, v) in upper {
            match merged.get(&key) {
                Some(&w) => {
                    if (v - w).abs() > 1e-12 * v.abs().max(w.abs()) {
                        return Err(Error::Asymmetric { row: key.1, col: key.0 });
                    }
                }
                None => {
                    merged.insert(key, v);
                }
            }
        }
        Ok(Self::from_lower_map(n, &merged))
    }

    /// Builds a matrix from lower-triangle entries, summing duplicates.
    /// Entries above the diagonal are folded onto their mirror position.
    pub(crate) fn from_lower_summed(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in entries {
            let key = if r >= c { (r, c) } else { (c, r) };
            *map.entry(key).or_default() += v;
        }
        Self::from_lower_map(n, &map)
    }

    fn from_lower_map(n: usize, lower: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(r, c), &v) in lower {
            cols[c].push((r, v));
            if r != c {
                cols[r].push((c, v));
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in cols {
            col.sort_by_key(|e| e.0);
            for (r, v) in col {
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self { n, col_ptr, row_idx, values }
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let n = diag.len();
        Self { n, col_ptr: (0..=n).collect(), row_idx: (0..n).collect(), values: diag.to_vec() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_matrix(&vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries counting both triangles.
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rows and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        rows.binary_search(&i).map(|p| vals[p]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * x[j];
            }
        }
        y
    }

    /// Entries of the lower triangle `(row >= col)` in column-major order.
    pub fn lower_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).filter(move |(&i, _)| i >= j).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SparseSymMatrix, s: f64) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let entries = self.lower_triplets().chain(other.lower_triplets().map(|(i, j, v)| (i, j, s * v)));
        Ok(Self::from_lower_summed(self.n, entries))
    }

    /// `A diag(d) B` for symmetric `A`, `B` whose product is known to be
    /// symmetric (for instance `B = A`, or `A` built from `B` and `d`).
    /// Only the lower triangle of the product is computed and then mirrored.
    pub(crate) fn sym_product(a: &SparseSymMatrix, d: &[f64], b: &SparseSymMatrix) -> Self {
        let n = a.n;
        let mut acc = vec![0.0; n];
        let mut mark = vec![usize::MAX; n];
        let mut touched = Vec::new();
        let mut entries = Vec::new();
        for j in 0..n {
            touched.clear();
            let (brows, bvals) = b.col(j);
            for (&k, &bkj) in brows.iter().zip(bvals) {
                let scale = d[k] * bkj;
                let (arows, avals) = a.col(k);
                for (&i, &aik) in arows.iter().zip(avals) {
                    if i < j {
                        continue;
                    }
                    if mark[i] != j {
                        mark[i] = j;
                        acc[i] = 0.0;
                        touched.push(i);
                    }
                    acc[i] += aik * scale;
                }
            }
            touched.sort_unstable();
            for &i in &touched {
                entries.push((i, j, acc[i]));
            }
        }
        Self::from_lower_summed(n, entries)
    }

    /// Symmetric permutation `C = P A P^T` with `C[i][j] = A[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut pinv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        Self::from_lower_summed(self.n, self.lower_triplets().map(|(i, j, v)| (pinv[i], pinv[j], v)))
    }

    /// Dense copy, row-major; intended for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for j in 0..self.n {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                d[i][j] = v;
            }
        }
        d
    }

    /// Serializes the lower triangle in the triplet text format.
    pub fn to_triplet_string(&self) -> String {
        let lower: Vec<_> = self.lower_triplets().collect();
        let mut s = format!("{} {}\n", self.n, lower.len());
        for (i, j, v) in lower {
            let _ = writeln!(s, "{i} {j} {v:.16e}");
        }
        s
    }

    /// Parses the triplet text format: a header `n nnz`, then `nnz` lines of
    /// `row col value` with 0-based indices.
    pub fn parse_triplets(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(origin, "missing header line `n nnz`"))?;
        let mut h = header.split_whitespace();
        let n: usize = parse_field(h.next(), origin, 1, "n")?;
        let nnz: usize = parse_field(h.next(), origin, 1, "nnz")?;
        let mut entries = Vec::with_capacity(nnz);
        for (lineno, line) in lines {
            let mut f = line.split_whitespace();
            let r: usize = parse_field(f.next(), origin, lineno + 1, "row")?;
            let c: usize = parse_field(f.next(), origin, lineno + 1, "col")?;
            let v: f64 = parse_field(f.next(), origin, lineno + 1, "value")?;
            entries.push((r, c, v));
        }
        if entries.len() != nnz {
            return Err(Error::parse(origin, format!("header declares {nnz} entries, found {}", entries.len())));
        }
        Self::from_triplets(n, &entries).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn read_triplets(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_triplets(&text, path)
    }

    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_triplet_string()).map_err(|e| Error::io(path, e))
    }
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, origin: &Path, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(origin, format!("line {line}: missing {what}")))?;
    tok.parse().map_err(|_| Error::parse(origin, format!("line {line}: cannot parse {what} from `{tok}`")))
}
