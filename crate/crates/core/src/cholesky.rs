//! Sparse Cholesky factorization `P A P^T = L L^T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

const NONE: usize = usize::MAX;

/// How the factor's row/column permutation was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Approximate minimum degree.
    Amd,
    /// Identity permutation.
    Natural,
    /// Permutation supplied by the caller.
    Given,
}

/// Lower-triangular sparse Cholesky factor of a permuted symmetric matrix.
///
/// `perm[k]` is the original index placed at position `k`. Columns of `L`
/// are stored with the diagonal first and row indices ascending.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    logdet: f64,
    ordering: Ordering,
}

impl CholeskyFactor {
    /// Factorizes `a` under an approximate-minimum-degree ordering.
    pub fn new(a: &SparseSymMatrix) -> Result<Self> {
        let perm = amd_ordering(a)?;
        Self::factor(a, perm, Ordering::Amd)
    }

    pub fn natural(a: &SparseSymMatrix) -> Result<Self> {
        Self::factor(a, (0..a.n()).collect(), Ordering::Natural)
    }

    /// Factorizes `a` with the given permutation (`perm[k]` = original index at position `k`).
    pub fn with_permutation(a: &SparseSymMatrix, perm: Vec<usize>) -> Result<Self> {
        if perm.len() != a.n() {
            return Err(Error::DimensionMismatch { expected: a.n(), found: perm.len() });
        }
        let mut seen = vec![false; a.n()];
        for &p in &perm {
            if p >= a.n() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("ordering is not a permutation".into()));
            }
        }
        Self::factor(a, perm, Ordering::Given)
    }

    fn factor(a: &SparseSymMatrix, perm: Vec<usize>, ordering: Ordering) -> Result<Self> {
        let n = a.n();
        let mut pinv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        let (cp, ci, cx) = permuted_upper(a, &perm, &pinv);
        let parent = etree(n, &cp, &ci);

        let mut stack = vec![0; n];
        let mut mark = vec![NONE; n];
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(&cp, &ci, k, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut col_ptr = vec![0; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0; nnz];
        let mut values = vec![0.0; nnz];
        let mut next: Vec<usize> = col_ptr[..n].to_vec();
        let mut x = vec![0.0; n];
        mark.iter_mut().for_each(|m| *m = NONE);
        let mut logdet = 0.0;

        for k in 0..n {
            let top = ereach(&cp, &ci, k, &parent, &mut stack, &mut mark);
            x[k] = 0.0;
            for p in cp[k]..cp[k + 1] {
                x[ci[p]] = cx[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / values[col_ptr[i]];
                x[i] = 0.0;
                for p in col_ptr[i] + 1..next[i] {
                    x[row_idx[p]] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                row_idx[p] = k;
                values[p] = lki;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: perm[k], value: d });
            }
            let p = next[k];
            next[k] += 1;
            row_idx[p] = k;
            values[p] = d.sqrt();
            logdet += d.ln();
        }
        Ok(Self { n, perm, pinv, col_ptr, row_idx, values, logdet, ordering })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Inverse permutation: `pinv()[i]` is the position of original index `i`.
    pub fn pinv(&self) -> &[usize] {
        &self.pinv
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    /// `log det A`.
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Rows and values of column `j` of `L`; the diagonal entry comes first.
    pub fn l_col(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[s..e], &self.values[s..e])
    }

    pub fn l_diag(&self, j: usize) -> f64 {
        self.values[self.col_ptr[j]]
    }

    /// Solves `L y = b` in place (permuted coordinates).
    pub fn solve_l_in_place(&self, b: &mut [f64]) {
        for j in 0..self.n {
            let (rows, vals) = self.l_col(j);
            b[j] /= vals[0];
            let bj = b[j];
            for (&i, &v) in rows[1..].iter().zip(&vals[1..]) {
                b[i] -= v * bj;
            }
        }
    }

    /// Solves `L^T y = b` in place (permuted coordinates).
    pub fn solve_lt_in_place(&self, b: &mut [f64]) {
        for j in (0..self.n).rev() {
            let (rows, vals) = self.l_col(j);
            let mut s = b[j];
            for (&i, &v) in rows[1..].iter().zip(&vals[1..]) {
                s -= v * b[i];
            }
            b[j] = s / vals[0];
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_l_in_place(&mut y);
        self.solve_lt_in_place(&mut y);
        let mut x = vec![0.0; self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    /// Diagonal of `A^{-1}` in original index order, computed by the
    /// Takahashi recursion restricted to the sparsity pattern of `L`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let mut sigma = vec![0.0; self.values.len()];
        let mut local = Vec::new();
        for i in (0..n).rev() {
            let (rows, vals) = self.l_col(i);
            let lii = vals[0];
            let below = &rows[1..];
            let m = below.len();
            // Sigma restricted to the rows below the diagonal of column i.
            local.clear();
            local.resize(m * m, 0.0);
            for a in 0..m {
                for b in a..m {
                    let v = self.sigma_at(&sigma, below[b], below[a]);
                    local[a * m + b] = v;
                    local[b * m + a] = v;
                }
            }
            let base = self.col_ptr[i];
            let mut diag = 1.0 / (lii * lii);
            for a in 0..m {
                let mut s = 0.0;
                for b in 0..m {
                    s += vals[1 + b] * local[b * m + a];
                }
                let sji = -s / lii;
                sigma[base + 1 + a] = sji;
                diag -= vals[1 + a] * sji / lii;
            }
            sigma[base] = diag;
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = sigma[self.col_ptr[k]];
        }
        out
    }

    /// Entry `(row, col)` of the selected inverse with `row >= col`.
    fn sigma_at(&self, sigma: &[f64], row: usize, col: usize) -> f64 {
        let (rows, _) = self.l_col(col);
        let pos = rows.binary_search(&row).expect("selected inverse entry outside the filled pattern");
        sigma[self.col_ptr[col] + pos]
    }

    /// Diagonal of `A^{-1}` by one solve per unit vector; `O(n)` solves.
    pub fn inverse_diagonal_by_solves(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        let mut e = vec![0.0; self.n];
        for k in 0..self.n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[k] = 1.0;
            self.solve_l_in_place(&mut e);
            out[self.perm[k]] = e.iter().map(|v| v * v).sum();
        }
        out
    }

    /// Largest entry of `|P A P^T - L L^T|`.
    pub fn reconstruction_error(&self, a: &SparseSymMatrix) -> f64 {
        let c = a.permuted(&self.perm);
        let n = self.n;
        let mut row_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for k in 0..n {
            let (rows, vals) = self.l_col(k);
            for (&i, &v) in rows.iter().zip(vals) {
                row_entries[i].push((k, v));
            }
        }
        let mut worst = 0.0f64;
        let mut col = vec![0.0; n];
        let mut mark = vec![NONE; n];
        let mut touched = Vec::new();
        for j in 0..n {
            touched.clear();
            // column j of L L^T, rows >= j: sum over k of L[i][k] L[j][k]
            for &(k, ljk) in &row_entries[j] {
                let (rows, vals) = self.l_col(k);
                for (&i, &lik) in rows.iter().zip(vals) {
                    if i < j {
                        continue;
                    }
                    if mark[i] != j {
                        mark[i] = j;
                        col[i] = 0.0;
                        touched.push(i);
                    }
                    col[i] += lik * ljk;
                }
            }
            let (rows, vals) = c.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                if i >= j {
                    if mark[i] != j {
                        mark[i] = j;
                        col[i] = 0.0;
                        touched.push(i);
                    }
                    col[i] -= v;
                }
            }
            for &i in &touched {
                worst = worst.max(col[i].abs());
            }
        }
        worst
    }
}

fn amd_ordering(a: &SparseSymMatrix) -> Result<Vec<usize>> {
    if a.n() == 0 {
        return Ok(Vec::new());
    }
    let (perm, _, _) = amd::order::<usize>(a.n(), a.col_ptr(), a.row_idx(), &amd::Control::default())
        .map_err(|s| Error::InvalidParameter(format!("minimum degree ordering failed: {s:?}")))?;
    Ok(perm)
}

/// Upper triangle of `P A P^T` in compressed-column form.
fn permuted_upper(a: &SparseSymMatrix, perm: &[usize], pinv: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let n = a.n();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (newj, &oldj) in perm.iter().enumerate() {
        let (rows, vals) = a.col(oldj);
        for (&oldi, &v) in rows.iter().zip(vals) {
            let newi = pinv[oldi];
            if newi <= newj {
                cols[newj].push((newi, v));
            }
        }
    }
    let mut cp = vec![0];
    let mut ci = Vec::new();
    let mut cx = Vec::new();
    for col in cols {
        for (i, v) in col {
            ci.push(i);
            cx.push(v);
        }
        cp.push(ci.len());
    }
    (cp, ci, cx)
}

/// Elimination tree of a matrix given by its upper triangle.
fn etree(n: usize, cp: &[usize], ci: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &start in &ci[cp[k]..cp[k + 1]] {
            let mut i = start;
            while i != NONE && i < k {
                let inext = ancestor[i];
                ancestor[i] = k;
                if inext == NONE {
                    parent[i] = k;
                }
                i = inext;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L`, written to `stack[top..]` in
/// topological order; returns `top`.
fn ereach(cp: &[usize], ci: &[usize], k: usize, parent: &[usize], stack: &mut [usize], mark: &mut [usize]) -> usize {
    let n = parent.len();
    let mut top = n;
    mark[k] = k;
    for &start in &ci[cp[k]..cp[k + 1]] {
        if start > k {
            continue;
        }
        let mut i = start;
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            stack[top] = stack[len];
        }
    }
    top
}
