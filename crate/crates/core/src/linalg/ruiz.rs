//! Modified Ruiz equilibration of the problem data.

use super::sparse::CscMatrix;
use crate::model::ConeSpec;

/// Diagonal scaling `D` (variables) and `U` (constraints) with inverses.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingState {
    pub d: Vec<f64>,
    pub dinv: Vec<f64>,
    pub u: Vec<f64>,
    pub uinv: Vec<f64>,
    /// Number of equilibration passes performed.
    pub iterations: usize,
}

impl ScalingState {
    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            d: vec![1.0; n],
            dinv: vec![1.0; n],
            u: vec![1.0; m],
            uinv: vec![1.0; m],
            iterations: 0,
        }
    }

    fn from_diagonals(d: Vec<f64>, u: Vec<f64>, iterations: usize) -> Self {
        let dinv = d.iter().map(|v| 1.0 / v).collect();
        let uinv = u.iter().map(|v| 1.0 / v).collect();
        Self {
            d,
            dinv,
            u,
            uinv,
            iterations,
        }
    }

    /// Applies the scaling to raw data: `DPD, Dq, UAD, Ub`.
    pub fn scale(&self, p: &CscMatrix, q: &[f64], a: &CscMatrix, b: &[f64]) -> ScaledData {
        let mut ps = p.clone();
        ps.scale_rows_cols(&self.d, &self.d);
        let mut as_ = a.clone();
        as_.scale_rows_cols(&self.u, &self.d);
        ScaledData {
            p: ps,
            q: q.iter().zip(&self.d).map(|(v, d)| v * d).collect(),
            a: as_,
            b: b.iter().zip(&self.u).map(|(v, u)| v * u).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScaledData {
    pub p: CscMatrix,
    pub q: Vec<f64>,
    pub a: CscMatrix,
    pub b: Vec<f64>,
}

/// Column infinity norms of `R = [[P, A'], [A, 0]]` where `p` holds the
/// upper triangle of `P`.
pub fn kkt_column_norms(p: &CscMatrix, a: &CscMatrix) -> Vec<f64> {
    let mut norms = p.sym_col_norms_inf();
    let a_cols = a.col_norms_inf();
    for (nv, av) in norms.iter_mut().zip(&a_cols) {
        *nv = nv.max(*av);
    }
    norms.extend(a.row_norms_inf());
    norms
}

/// Equilibrates `R = [[P, A'], [A, 0]]`.
///
/// Each pass scales every column with norm above `tau` by the inverse square
/// root of its norm; passes stop once `max |1 - c_i| <= tol` or after
/// `max_iter` passes. Rows belonging to cones that do not admit elementwise
/// scaling then receive the mean of their block's scale factors.
pub fn ruiz_equilibrate(
    p: &CscMatrix,
    q: &[f64],
    a: &CscMatrix,
    b: &[f64],
    cones: &[ConeSpec],
    max_iter: usize,
    tol: f64,
    tau: f64,
) -> (ScalingState, ScaledData) {
    let n = p.ncols;
    let m = a.nrows;
    let mut d = vec![1.0; n];
    let mut u = vec![1.0; m];
    let mut ps = p.upper_triangle();
    let mut as_ = a.clone();
    let mut c = vec![1.0; n + m];
    let mut passes = 0;

    while passes < max_iter {
        let norms = kkt_column_norms(&ps, &as_);
        for (ci, &nv) in c.iter_mut().zip(&norms) {
            *ci = if nv > tau { 1.0 / nv.sqrt() } else { 1.0 };
        }
        let (cd, cu) = c.split_at(n);
        for (di, ci) in d.iter_mut().zip(cd) {
            *di *= ci;
        }
        for (ui, ci) in u.iter_mut().zip(cu) {
            *ui *= ci;
        }
        ps.scale_rows_cols(cd, cd);
        as_.scale_rows_cols(cu, cd);
        passes += 1;
        let dev = c.iter().fold(0.0f64, |acc, ci| acc.max((1.0 - ci).abs()));
        if dev <= tol {
            break;
        }
    }

    let mut offset = 0;
    for cone in cones {
        let dim = cone.dim();
        if cone.needs_uniform_scaling() && dim > 0 {
            let block = &mut u[offset..offset + dim];
            let mean = block.iter().sum::<f64>() / dim as f64;
            block.iter_mut().for_each(|v| *v = mean);
        }
        offset += dim;
    }

    let state = ScalingState::from_diagonals(d, u, passes);
    let data = state.scale(&p.upper_triangle(), q, a, b);
    (state, data)
}

/// Maps scaled iterates back: `x = D x̂`, `s = U⁻¹ ŝ`, `y = U ŷ`.
pub fn unscale(state: &ScalingState, xh: &[f64], sh: &[f64], yh: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = xh.iter().zip(&state.d).map(|(v, d)| v * d).collect();
    let s = sh.iter().zip(&state.uinv).map(|(v, u)| v * u).collect();
    let y = yh.iter().zip(&state.u).map(|(v, u)| v * u).collect();
    (x, s, y)
}

/// Inverse of [`unscale`].
pub fn rescale(state: &ScalingState, x: &[f64], s: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let xh = x.iter().zip(&state.dinv).map(|(v, d)| v * d).collect();
    let sh = s.iter().zip(&state.u).map(|(v, u)| v * u).collect();
    let yh = y.iter().zip(&state.uinv).map(|(v, u)| v * u).collect();
    (xh, sh, yh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_norm_columns_left_alone() {
        let p = CscMatrix::identity(2);
        let a = CscMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let cones = [ConeSpec::Nonneg(2)];
        let (st, _) = ruiz_equilibrate(&p, &[0.0; 2], &a, &[0.0; 2], &cones, 10, 1e-4, 1e-6);
        assert_eq!(st.iterations, 1);
        assert!(st.d.iter().chain(&st.u).all(|&v| v == 1.0));
    }

    #[test]
    fn scalar_hand_execution() {
        let p = CscMatrix::zeros(1, 1);
        let a = CscMatrix::from_dense(&[vec![4.0]]);
        let (st, data) =
            ruiz_equilibrate(&p, &[1.0], &a, &[1.0], &[ConeSpec::Nonneg(1)], 10, 1e-4, 1e-6);
        assert_eq!(st.d, vec![0.5]);
        assert_eq!(st.u, vec![0.5]);
        assert_eq!(data.a.get(0, 0), 1.0);
        // second pass sees unit norms and stops
        assert_eq!(st.iterations, 2);
    }

    #[test]
    fn small_columns_keep_unit_scale() {
        let p = CscMatrix::diagonal(&[1e-8, 1.0]);
        let a = CscMatrix::zeros(0, 2);
        let (st, _) = ruiz_equilibrate(&p, &[0.0; 2], &a, &[], &[], 10, 1e-4, 1e-6);
        assert_eq!(st.d[0], 1.0);
    }

    #[test]
    fn second_order_block_gets_mean_scale() {
        let p = CscMatrix::zeros(1, 1);
        let a = CscMatrix::from_dense(&[vec![4.0], vec![1.0], vec![9.0]]);
        let cones = [ConeSpec::SecondOrder(3)];
        let (st, _) = ruiz_equilibrate(&p, &[0.0], &a, &[0.0; 3], &cones, 10, 1e-4, 1e-6);
        assert!(st.u.iter().all(|&v| (v - st.u[0]).abs() < 1e-15));
    }

    #[test]
    fn unscale_and_rescale_are_inverse() {
        let st = ScalingState::from_diagonals(vec![2.0, 0.5], vec![3.0], 1);
        let (x, s, y) = unscale(&st, &[1.0, 1.0], &[3.0], &[1.0]);
        assert_eq!(x, vec![2.0, 0.5]);
        assert_eq!(s, vec![1.0]);
        assert_eq!(y, vec![3.0]);
        let (xh, sh, yh) = rescale(&st, &x, &s, &y);
        assert_eq!((xh, sh, yh), (vec![1.0, 1.0], vec![3.0], vec![1.0]));
    }
}
