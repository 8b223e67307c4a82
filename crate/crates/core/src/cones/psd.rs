use nalgebra::{DMatrix, SymmetricEigen};

use super::{within, ConeKernel};
use crate::error::{Result, SolverError};
use crate::linalg::svec::{smat_into, triangular_side};

const EIG_EPS: f64 = 1e-15;

fn side_of(len: usize) -> Result<usize> {
    triangular_side(len).ok_or(SolverError::NotTriangular(len))
}

fn eigen(v: &[f64], n: usize) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let mut m = DMatrix::zeros(n, n);
    smat_into(v, &mut m);
    SymmetricEigen::try_new(m, EIG_EPS, 0).ok_or(SolverError::Eigen { side: n })
}

/// Projects an svec vector onto the PSD cone by clipping negative
/// eigenvalues.
pub fn project_psd_triangle(v: &mut [f64]) -> Result<()> {
    let n = side_of(v.len())?;
    if n == 0 {
        return Ok(());
    }
    if n == 1 {
        v[0] = v[0].max(0.0);
        return Ok(());
    }
    let eig = eigen(v, n)?;
    let npos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    if npos == n {
        return Ok(());
    }
    if npos == 0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        return Ok(());
    }
    // Rebuild from whichever eigenvalue group is smaller:
    // X+ = Σ_{λ>0} λ q q'  or  X+ = X - Σ_{λ<0} λ q q'.
    let use_pos = npos <= n - npos;
    let mut w = DMatrix::zeros(n, if use_pos { npos } else { n - npos });
    let mut col = 0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if (l > 0.0) == use_pos {
            let f = l.abs().sqrt();
            for i in 0..n {
                w[(i, col)] = eig.eigenvectors[(i, k)] * f;
            }
            col += 1;
        }
    }
    let low = &w * w.transpose();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            let scale = if i == j { 1.0 } else { sqrt2 };
            if use_pos {
                v[k] = scale * low[(i, j)];
            } else {
                v[k] += scale * low[(i, j)];
            }
            k += 1;
        }
    }
    Ok(())
}

/// Smallest eigenvalue of `smat(v)`.
pub fn psd_min_eigenvalue(v: &[f64]) -> Result<f64> {
    let n = side_of(v.len())?;
    if n == 0 {
        return Ok(0.0);
    }
    let mut m = DMatrix::zeros(n, n);
    smat_into(v, &mut m);
    let ev = m.symmetric_eigenvalues();
    Ok(ev.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Frobenius distance from `smat(v)` to the PSD cone.
fn psd_distance(v: &[f64]) -> Option<f64> {
    let n = triangular_side(v.len())?;
    let mut m = DMatrix::zeros(n, n);
    smat_into(v, &mut m);
    let ev = m.symmetric_eigenvalues();
    Some(ev.iter().map(|l| l.min(0.0).powi(2)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone)]
pub struct PsdTriangleCone {
    dim: usize,
}

impl PsdTriangleCone {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl ConeKernel for PsdTriangleCone {
    fn name(&self) -> &str {
        "psd"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, v: &mut [f64]) -> Result<()> {
        project_psd_triangle(v)
    }

    fn in_dual(&self, v: &[f64], tol: f64) -> Option<bool> {
        psd_distance(v).map(|d| within(d, v, tol))
    }

    fn in_recession_of_negated(&self, v: &[f64], tol: f64) -> Option<bool> {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        psd_distance(&neg).map(|d| within(d, v, tol))
    }
}
