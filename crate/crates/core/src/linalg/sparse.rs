//! Compressed sparse column storage and the handful of kernels the solver needs.

use crate::error::{Result, SolverError};

/// Sparse matrix in compressed column format.
///
/// Row indices are strictly increasing within each column and there are no
/// explicit duplicates. Explicit zeros are allowed (they keep a structural slot).
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowval: Vec<usize>,
    pub nzval: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowval: Vec::new(),
            nzval: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowval: (0..n).collect(),
            nzval: d.to_vec(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; ncols + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of range");
            counts[c + 1] += 1;
        }
        for c in 0..ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let k = next[c];
            rows[k] = r;
            vals[k] = v;
            next[c] += 1;
        }

        let mut colptr = vec![0usize; ncols + 1];
        let mut rowval = Vec::with_capacity(triplets.len());
        let mut nzval = Vec::with_capacity(triplets.len());
        let mut order: Vec<usize> = Vec::new();
        for c in 0..ncols {
            order.clear();
            order.extend(counts[c]..counts[c + 1]);
            order.sort_by_key(|&k| rows[k]);
            let mut last: Option<usize> = None;
            for &k in &order {
                if last == Some(rows[k]) {
                    *nzval.last_mut().unwrap() += vals[k];
                } else {
                    rowval.push(rows[k]);
                    nzval.push(vals[k]);
                    last = Some(rows[k]);
                }
            }
            colptr[c + 1] = rowval.len();
        }
        Self {
            nrows,
            ncols,
            colptr,
            rowval,
            nzval,
        }
    }

    /// Dense row-major input, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            out[r][c] += v;
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.nzval.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Iterates `(row, col, value)` in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |c| {
            (self.colptr[c]..self.colptr[c + 1]).map(move |k| (self.rowval[k], c, self.nzval[k]))
        })
    }

    pub fn col(&self, c: usize) -> (&[usize], &[f64]) {
        let r = self.colptr[c]..self.colptr[c + 1];
        (&self.rowval[r.clone()], &self.nzval[r])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (rows, vals) = self.col(col);
        match rows.binary_search(&row) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Checks the storage invariants.
    pub fn check_format(&self) -> std::result::Result<(), String> {
        if self.colptr.len() != self.ncols + 1 {
            return Err(format!(
                "column pointer length {} != ncols + 1 = {}",
                self.colptr.len(),
                self.ncols + 1
            ));
        }
        if self.colptr[0] != 0 || *self.colptr.last().unwrap() != self.rowval.len() {
            return Err("column pointers do not span the index array".into());
        }
        if self.rowval.len() != self.nzval.len() {
            return Err("row index and value arrays differ in length".into());
        }
        if let Some(c) = (0..self.ncols).find(|&c| self.colptr[c] > self.colptr[c + 1]) {
            return Err(format!("column pointers decrease at column {c}"));
        }
        for c in 0..self.ncols {
            let rows = &self.rowval[self.colptr[c]..self.colptr[c + 1]];
            for w in rows.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("row indices not strictly increasing in column {c}"));
                }
            }
            if let Some(&r) = rows.last() {
                if r >= self.nrows {
                    return Err(format!("row index {r} out of range in column {c}"));
                }
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.rowval {
            counts[r + 1] += 1;
        }
        for r in 0..self.nrows {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut rowval = vec![0usize; self.nnz()];
        let mut nzval = vec![0.0; self.nnz()];
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowval[k];
                let dst = next[r];
                rowval[dst] = c;
                nzval[dst] = self.nzval[k];
                next[r] += 1;
            }
        }
        CscMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            colptr: counts,
            rowval,
            nzval,
        }
    }

    /// Keeps only entries with `row <= col`.
    pub fn upper_triangle(&self) -> CscMatrix {
        let trip: Vec<_> = self.iter().filter(|&(r, c, _)| r <= c).collect();
        CscMatrix::from_triplets(self.nrows, self.ncols, &trip)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.iter().all(|(r, c, _)| r <= c)
    }

    /// Structural and numerical symmetry of a fully stored matrix, or trivially
    /// true when only the upper triangle is stored.
    pub fn is_symmetric_storage(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        if self.is_upper_triangular() {
            return true;
        }
        self.iter().all(|(r, c, v)| self.get(c, r) == v)
    }

    /// `y = alpha * A x + beta * y`
    pub fn gemv(&self, alpha: f64, x: &[f64], beta: f64, y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        if beta != 1.0 {
            y.iter_mut().for_each(|v| *v *= beta);
        }
        for c in 0..self.ncols {
            let xc = alpha * x[c];
            if xc == 0.0 {
                continue;
            }
            for k in self.colptr[c]..self.colptr[c + 1] {
                y[self.rowval[k]] += self.nzval[k] * xc;
            }
        }
    }

    /// `y = alpha * A' x + beta * y`
    pub fn gemv_t(&self, alpha: f64, x: &[f64], beta: f64, y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for c in 0..self.ncols {
            let mut acc = 0.0;
            for k in self.colptr[c]..self.colptr[c + 1] {
                acc += self.nzval[k] * x[self.rowval[k]];
            }
            y[c] = beta * y[c] + alpha * acc;
        }
    }

    /// `y = alpha * S x + beta * y` where `S` is the symmetric matrix whose upper
    /// triangle is stored in `self`. Entries below the diagonal are ignored.
    pub fn symv_upper(&self, alpha: f64, x: &[f64], beta: f64, y: &mut [f64]) {
        debug_assert!(self.is_square());
        if beta != 1.0 {
            y.iter_mut().for_each(|v| *v *= beta);
        }
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowval[k];
                let v = self.nzval[k];
                if r == c {
                    y[r] += alpha * v * x[c];
                } else if r < c {
                    y[r] += alpha * v * x[c];
                    y[c] += alpha * v * x[r];
                }
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.gemv(1.0, x, 0.0, &mut y);
        y
    }

    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.gemv_t(1.0, x, 0.0, &mut y);
        y
    }

    /// `diag(left) * A * diag(right)` in place.
    pub fn scale_rows_cols(&mut self, left: &[f64], right: &[f64]) {
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                self.nzval[k] *= left[self.rowval[k]] * right[c];
            }
        }
    }

    /// Infinity norm of every column.
    pub fn col_norms_inf(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|c| {
                self.nzval[self.colptr[c]..self.colptr[c + 1]]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect()
    }

    /// Infinity norm of every row.
    pub fn row_norms_inf(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.nrows];
        for (r, _, v) in self.iter() {
            out[r] = out[r].max(v.abs());
        }
        out
    }

    /// Column norms of the symmetric matrix with this upper triangle.
    pub fn sym_col_norms_inf(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.ncols];
        for (r, c, v) in self.iter() {
            if r <= c {
                out[c] = out[c].max(v.abs());
                out[r] = out[r].max(v.abs());
            }
        }
        out
    }

    /// Stacks `[self; other]` vertically.
    pub fn vstack(&self, other: &CscMatrix) -> Result<CscMatrix> {
        if self.ncols != other.ncols {
            return Err(SolverError::DimensionMismatch {
                context: "vstack",
                expected: self.ncols,
                found: other.ncols,
            });
        }
        let mut trip: Vec<_> = self.iter().collect();
        trip.extend(other.iter().map(|(r, c, v)| (r + self.nrows, c, v)));
        Ok(CscMatrix::from_triplets(
            self.nrows + other.nrows,
            self.ncols,
            &trip,
        ))
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
