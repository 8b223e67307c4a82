//! Sparse LDLᵀ factorisation for quasi-definite matrices.
//!
//! Up-looking elimination in the style of QDLDL: elimination tree, column
//! counts, then a numeric pass that builds one row of `L` per step. `D` is
//! strictly diagonal (no 2x2 pivots), which is always possible for
//! quasi-definite input under any symmetric permutation.

use super::ordering::{invert_permutation, minimum_degree};
use super::sparse::CscMatrix;
use crate::error::{Result, SolverError};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct LdlFactors {
    n: usize,
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
}

impl LdlFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn nnz_l(&self) -> usize {
        self.lx.len()
    }

    /// Strictly lower part of the unit lower-triangular factor, in permuted
    /// coordinates.
    pub fn l(&self) -> CscMatrix {
        CscMatrix {
            nrows: self.n,
            ncols: self.n,
            colptr: self.lp.clone(),
            rowval: self.li.clone(),
            nzval: self.lx.clone(),
        }
    }

    /// Number of positive and negative pivots.
    pub fn inertia(&self) -> (usize, usize) {
        let pos = self.d.iter().filter(|&&v| v > 0.0).count();
        (pos, self.n - pos)
    }

    /// Solves `K z = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [f64], work: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.n);
        debug_assert_eq!(work.len(), self.n);
        for k in 0..self.n {
            work[k] = rhs[self.perm[k]];
        }
        // L y = b
        for i in 0..self.n {
            let xi = work[i];
            if xi != 0.0 {
                for p in self.lp[i]..self.lp[i + 1] {
                    work[self.li[p]] -= self.lx[p] * xi;
                }
            }
        }
        for i in 0..self.n {
            work[i] *= self.dinv[i];
        }
        // L' x = y
        for i in (0..self.n).rev() {
            let mut acc = work[i];
            for p in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[p] * work[self.li[p]];
            }
            work[i] = acc;
        }
        for k in 0..self.n {
            rhs[self.perm[k]] = work[k];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(SolverError::DimensionMismatch {
                context: "ldl_solve rhs",
                expected: self.n,
                found: rhs.len(),
            });
        }
        let mut out = rhs.to_vec();
        let mut work = vec![0.0; self.n];
        self.solve_in_place(&mut out, &mut work);
        Ok(out)
    }
}

/// Factors the symmetric matrix whose upper triangle is `k`.
///
/// `n_pos` is the size of the leading positive definite block; the factor
/// must end up with exactly that many positive pivots.
pub fn ldl_factor(k: &CscMatrix, n_pos: usize) -> Result<LdlFactors> {
    if !k.is_square() {
        return Err(SolverError::DimensionMismatch {
            context: "ldl_factor (square input)",
            expected: k.nrows,
            found: k.ncols,
        });
    }
    let n = k.ncols;
    let mut adj = vec![Vec::new(); n];
    for (r, c, _) in k.iter() {
        if r > c {
            return Err(SolverError::NotUpperTriangular { row: r, col: c });
        }
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    let perm = minimum_degree(&adj);
    factor_with_permutation(k, perm, n_pos)
}

/// Same as [`ldl_factor`] but with a caller-supplied ordering.
pub fn factor_with_permutation(k: &CscMatrix, perm: Vec<usize>, n_pos: usize) -> Result<LdlFactors> {
    let n = k.ncols;
    let iperm = invert_permutation(&perm);
    let kp = permute_upper(k, &iperm);

    // elimination tree and column counts
    let mut etree = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    let mut work = vec![NONE; n];
    for j in 0..n {
        work[j] = j;
        for p in kp.colptr[j]..kp.colptr[j + 1] {
            let mut i = kp.rowval[p];
            if i == j {
                continue;
            }
            while work[i] != j {
                if etree[i] == NONE {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }

    let mut lp = vec![0usize; n + 1];
    for i in 0..n {
        lp[i + 1] = lp[i] + lnz[i];
    }
    let total = lp[n];
    let mut li = vec![0usize; total];
    let mut lx = vec![0.0; total];
    let mut d = vec![0.0; n];
    let mut dinv = vec![0.0; n];

    let mut y_vals = vec![0.0; n];
    let mut y_used = vec![false; n];
    let mut y_idx = vec![0usize; n];
    let mut elim = vec![0usize; n];
    let mut next_space: Vec<usize> = lp[..n].to_vec();

    for kcol in 0..n {
        let mut nnz_y = 0;
        d[kcol] = 0.0;
        for p in kp.colptr[kcol]..kp.colptr[kcol + 1] {
            let bidx = kp.rowval[p];
            if bidx == kcol {
                d[kcol] = kp.nzval[p];
                continue;
            }
            y_vals[bidx] = kp.nzval[p];
            if !y_used[bidx] {
                y_used[bidx] = true;
                elim[0] = bidx;
                let mut n_elim = 1;
                let mut next = etree[bidx];
                while next != NONE && next < kcol {
                    if y_used[next] {
                        break;
                    }
                    y_used[next] = true;
                    elim[n_elim] = next;
                    n_elim += 1;
                    next = etree[next];
                }
                while n_elim > 0 {
                    n_elim -= 1;
                    y_idx[nnz_y] = elim[n_elim];
                    nnz_y += 1;
                }
            }
        }
        for i in (0..nnz_y).rev() {
            let c = y_idx[i];
            let tmp = next_space[c];
            let yc = y_vals[c];
            for j in lp[c]..tmp {
                y_vals[li[j]] -= lx[j] * yc;
            }
            li[tmp] = kcol;
            let lval = yc * dinv[c];
            lx[tmp] = lval;
            d[kcol] -= yc * lval;
            next_space[c] += 1;
            y_vals[c] = 0.0;
            y_used[c] = false;
        }
        if d[kcol] == 0.0 || !d[kcol].is_finite() {
            return Err(SolverError::ZeroPivot {
                column: perm[kcol],
            });
        }
        dinv[kcol] = 1.0 / d[kcol];
    }

    let f = LdlFactors {
        n,
        perm,
        lp,
        li,
        lx,
        d,
        dinv,
    };
    let (pos, _) = f.inertia();
    if pos != n_pos {
        return Err(SolverError::NotQuasiDefinite {
            positive: pos,
            expected: n_pos,
        });
    }
    Ok(f)
}

/// Symmetric permutation of an upper-triangle matrix: returns the upper
/// triangle of `P K P'` with `new = iperm[old]`.
fn permute_upper(k: &CscMatrix, iperm: &[usize]) -> CscMatrix {
    let trip: Vec<_> = k
        .iter()
        .map(|(r, c, v)| {
            let (a, b) = (iperm[r], iperm[c]);
            if a <= b {
                (a, b, v)
            } else {
                (b, a, v)
            }
        })
        .collect();
    CscMatrix::from_triplets(k.nrows, k.ncols, &trip)
}
