//! Isometric vectorisation of symmetric matrices.
//!
//! The upper triangle is stacked column by column with off-diagonal entries
//! scaled by `sqrt(2)`: `(V11, √2 V12, V22, √2 V13, √2 V23, V33, ...)`.

use nalgebra::DMatrix;

use crate::error::{Result, SolverError};

/// Length of the vectorised upper triangle of an `n x n` matrix.
pub const fn triangular_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Inverse of [`triangular_len`]; `None` when `len` is not triangular.
pub fn triangular_side(len: usize) -> Option<usize> {
    let n = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (n.saturating_sub(1)..=n + 1).find(|&k| triangular_len(k) == len)
}

/// Position of entry `(i, j)` (either order) in the vectorised upper triangle.
#[inline]
pub fn svec_index(i: usize, j: usize) -> usize {
    let (r, c) = if i <= j { (i, j) } else { (j, i) };
    c * (c + 1) / 2 + r
}

/// Inverse of [`svec_index`]: returns `(row, col)` with `row <= col`.
pub fn svec_entry(k: usize) -> (usize, usize) {
    let mut c = (((8 * k + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while triangular_len(c + 1) <= k {
        c += 1;
    }
    while triangular_len(c) > k {
        c -= 1;
    }
    (k - triangular_len(c), c)
}

pub fn svec(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(SolverError::DimensionMismatch {
            context: "svec (square input)",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let n = m.nrows();
    let mut out = Vec::with_capacity(triangular_len(n));
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                out.push(m[(i, j)]);
            } else {
                out.push(std::f64::consts::SQRT_2 * m[(i, j)]);
            }
        }
    }
    Ok(out)
}

pub fn smat(v: &[f64]) -> Result<DMatrix<f64>> {
    let n = triangular_side(v.len()).ok_or(SolverError::NotTriangular(v.len()))?;
    let mut m = DMatrix::zeros(n, n);
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] * inv;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    Ok(m)
}

/// `smat` into a preallocated buffer; `v.len()` must equal `triangular_len(n)`.
pub(crate) fn smat_into(v: &[f64], m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] * inv;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn identity_and_small_matrices() {
        assert_eq!(svec(&DMatrix::identity(2, 2)).unwrap(), vec![1.0, 0.0, 1.0]);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(svec(&m).unwrap(), vec![1.0, 2.0 * SQRT_2, 3.0]);
        assert_eq!(smat(&[1.0, 0.0, 1.0]).unwrap(), DMatrix::identity(2, 2));
        let back = smat(&[1.0, 2.0 * SQRT_2, 3.0]).unwrap();
        assert!((back - m).abs().max() < 1e-15);
    }

    #[test]
    fn ordering_matches_column_stacked_upper_triangle() {
        let m = DMatrix::from_fn(3, 3, |i, j| (10 * i.min(j) + i.max(j)) as f64);
        let v = svec(&m).unwrap();
        // V11, √2 V12, V22, √2 V13, √2 V23, V33
        let expect = [m[(0, 0)], SQRT_2 * m[(0, 1)], m[(1, 1)], SQRT_2 * m[(0, 2)], SQRT_2 * m[(1, 2)], m[(2, 2)]];
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        for k in 0..6 {
            let (i, j) = svec_entry(k);
            assert_eq!(svec_index(i, j), k);
        }
    }

    #[test]
    fn non_square_and_non_triangular_rejected() {
        assert!(svec(&DMatrix::zeros(2, 3)).is_err());
        assert!(matches!(smat(&[0.0; 5]), Err(SolverError::NotTriangular(5))));
    }

    #[test]
    fn triangular_side_recovers_n() {
        for n in 0..200 {
            assert_eq!(triangular_side(triangular_len(n)), Some(n));
        }
        assert_eq!(triangular_side(5), None);
        assert_eq!(triangular_side(7), None);
    }
}
