//! The affine set of `n x n` matrices whose rows and columns sum to one.
//!
//! Vectors are column-major: entry `(i, j)` sits at `j * n + i`. The
//! constraint operator `A` stacks the `n` row sums and the first `n - 1`
//! column sums (the last column sum is implied), which makes `A A'`
//! invertible with a closed-form inverse.

use super::{within, ConeKernel};
use crate::error::{Result, SolverError};
use crate::linalg::sparse::norm2;

fn side_of(len: usize) -> Result<usize> {
    let n = (len as f64).sqrt().round() as usize;
    if n * n == len && n > 0 {
        Ok(n)
    } else {
        Err(SolverError::NotSquare(len))
    }
}

/// `(A A')⁻¹ r` for `r = [r1; r2]` with `r1` of length `n`, `r2` of
/// length `n - 1`.
fn solve_gram(r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = r1.len();
    let nf = n as f64;
    let sum_r1: f64 = r1.iter().sum();
    let t: Vec<f64> = r2.iter().map(|v| v - sum_r1 / nf).collect();
    let sum_t: f64 = t.iter().sum();
    let eta2: Vec<f64> = t.iter().map(|v| (v + sum_t) / nf).collect();
    let sum_eta2: f64 = eta2.iter().sum();
    let eta1: Vec<f64> = r1.iter().map(|v| (v - sum_eta2) / nf).collect();
    (eta1, eta2)
}

/// `A s` split into row sums and the first `n - 1` column sums.
fn apply_a(s: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n - 1];
    for j in 0..n {
        let col = &s[j * n..(j + 1) * n];
        for (i, &v) in col.iter().enumerate() {
            rows[i] += v;
        }
        if j + 1 < n {
            cols[j] = col.iter().sum();
        }
    }
    (rows, cols)
}

/// `s -= A' [eta1; eta2]`.
fn subtract_at(s: &mut [f64], n: usize, eta1: &[f64], eta2: &[f64]) {
    for j in 0..n {
        let cj = if j + 1 < n { eta2[j] } else { 0.0 };
        for i in 0..n {
            s[j * n + i] -= eta1[i] + cj;
        }
    }
}

/// Projection of `s` (length `n²`) onto the doubly stochastic affine set.
pub fn project_doubly_stochastic_affine(s: &mut [f64]) -> Result<()> {
    let n = side_of(s.len())?;
    let (mut r1, mut r2) = apply_a(s, n);
    r1.iter_mut().for_each(|v| *v -= 1.0);
    r2.iter_mut().for_each(|v| *v -= 1.0);
    let (eta1, eta2) = solve_gram(&r1, &r2);
    subtract_at(s, n, &eta1, &eta2);
    Ok(())
}

/// Least-squares multipliers `eta` for `w ≈ A' eta`, plus the distance of
/// `w` from the range of `A'`.
fn range_decomposition(w: &[f64], n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let (r1, r2) = apply_a(w, n);
    let (eta1, eta2) = solve_gram(&r1, &r2);
    let mut resid = w.to_vec();
    subtract_at(&mut resid, n, &eta1, &eta2);
    let dist = norm2(&resid);
    (eta1, eta2, dist)
}

/// Kernel for the doubly stochastic affine set; usable as a custom set.
#[derive(Debug, Clone)]
pub struct DoublyStochasticSet {
    n: usize,
}

impl DoublyStochasticSet {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn side(&self) -> usize {
        self.n
    }
}

impl ConeKernel for DoublyStochasticSet {
    fn name(&self) -> &str {
        "doubly_stochastic"
    }

    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn project(&self, v: &mut [f64]) -> Result<()> {
        project_doubly_stochastic_affine(v)
    }

    fn is_cone(&self) -> bool {
        false
    }

    /// Finite only on the range of `A'`, where `w = A' eta` gives
    /// `σ(w) = 1' eta`.
    fn support(&self, w: &[f64], tol: f64) -> Option<f64> {
        let (eta1, eta2, dist) = range_decomposition(w, self.n);
        if within(dist, w, tol) {
            Some(eta1.iter().sum::<f64>() + eta2.iter().sum::<f64>())
        } else {
            Some(f64::INFINITY)
        }
    }

    /// The recession cone is the null space of `A` (zero row and column
    /// sums), which is symmetric under negation.
    fn in_recession_of_negated(&self, v: &[f64], tol: f64) -> Option<bool> {
        let (eta1, eta2, _) = range_decomposition(v, self.n);
        let mut range_part = vec![0.0; v.len()];
        subtract_at(&mut range_part, self.n, &eta1, &eta2);
        let dist = norm2(&range_part);
        Some(within(dist, v, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_fixed() {
        let mut s = vec![1.0, 0.0, 0.0, 1.0];
        project_doubly_stochastic_affine(&mut s).unwrap();
        for (a, b) in s.iter().zip([1.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_maps_to_uniform() {
        let mut s = vec![0.0; 4];
        project_doubly_stochastic_affine(&mut s).unwrap();
        assert!(s.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn sums_are_one() {
        let n = 7;
        let mut s: Vec<f64> = (0..n * n).map(|k| ((k * 37 % 11) as f64) - 4.0).collect();
        project_doubly_stochastic_affine(&mut s).unwrap();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| s[j * n + i]).sum();
            let col: f64 = s[i * n..(i + 1) * n].iter().sum();
            assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_square_length_rejected() {
        assert!(matches!(
            project_doubly_stochastic_affine(&mut [0.0; 3]),
            Err(SolverError::NotSquare(3))
        ));
    }

    #[test]
    fn support_on_and_off_range() {
        let k = DoublyStochasticSet::new(2);
        // the all-ones matrix is A' (1, 1, 0); its support is the constant n
        assert!((k.support(&[1.0; 4], 1e-9).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(k.support(&[1.0, -1.0, -1.0, 1.0], 1e-9), Some(f64::INFINITY));
        assert_eq!(k.in_recession_of_negated(&[1.0, -1.0, -1.0, 1.0], 1e-9), Some(true));
        assert_eq!(k.in_recession_of_negated(&[1.0, 0.0, 0.0, 0.0], 1e-9), Some(false));
    }
}
