//! Assembly of the quasi-definite system matrix used by every ADMM step.

use super::sparse::CscMatrix;
use crate::error::{Result, SolverError};

/// Upper triangle of `[[P + sigma I, A'], [A, -diag(1/rho)]]`.
///
/// Entries of `p` below the diagonal are ignored, so either storage of `P`
/// is accepted. `rho` holds one value per constraint row.
pub fn kkt_assemble(p: &CscMatrix, a: &CscMatrix, sigma: f64, rho: &[f64]) -> Result<CscMatrix> {
    let n = p.ncols;
    let m = a.nrows;
    if !p.is_square() {
        return Err(SolverError::DimensionMismatch {
            context: "kkt_assemble: P must be square",
            expected: p.nrows,
            found: p.ncols,
        });
    }
    if a.ncols != n {
        return Err(SolverError::DimensionMismatch {
            context: "kkt_assemble: columns of A",
            expected: n,
            found: a.ncols,
        });
    }
    if rho.len() != m {
        return Err(SolverError::DimensionMismatch {
            context: "kkt_assemble: rho length",
            expected: m,
            found: rho.len(),
        });
    }
    let mut trip = Vec::with_capacity(p.nnz() + n + a.nnz() + m);
    trip.extend(p.iter().filter(|&(r, c, _)| r <= c));
    trip.extend((0..n).map(|i| (i, i, sigma)));
    // A' occupies the upper-right block: entry A[r, c] lands at (c, n + r)
    trip.extend(a.iter().map(|(r, c, v)| (c, n + r, v)));
    trip.extend(rho.iter().enumerate().map(|(i, &r)| (n + i, n + i, -1.0 / r)));
    Ok(CscMatrix::from_triplets(n + m, n + m, &trip))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let p = CscMatrix::zeros(1, 1);
        let a = CscMatrix::from_dense(&[vec![1.0]]);
        let k = kkt_assemble(&p, &a, 1.0, &[1.0]).unwrap();
        assert_eq!(k.to_dense(), vec![vec![1.0, 1.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn no_constraints() {
        let p = CscMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]).upper_triangle();
        let a = CscMatrix::zeros(0, 2);
        let k = kkt_assemble(&p, &a, 0.5, &[]).unwrap();
        assert_eq!(k.to_dense(), vec![vec![2.5, 1.0], vec![0.0, 3.5]]);
    }

    #[test]
    fn mismatches_rejected() {
        let p = CscMatrix::zeros(2, 2);
        let a = CscMatrix::zeros(1, 3);
        assert!(kkt_assemble(&p, &a, 1.0, &[1.0]).is_err());
        let a = CscMatrix::zeros(1, 2);
        assert!(kkt_assemble(&p, &a, 1.0, &[1.0, 1.0]).is_err());
    }
}
