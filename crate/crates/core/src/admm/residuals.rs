use crate::linalg::sparse::norm_inf;
use crate::model::{ProblemData, Settings};

/// Primal and dual residuals on unscaled data together with the terms used
/// by the relative part of the stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualInfo {
    /// `Ax + s - b`
    pub r_prim: Vec<f64>,
    /// `Px + q - A'y`
    pub r_dual: Vec<f64>,
    pub r_prim_norm: f64,
    pub r_dual_norm: f64,
    pub ax_norm: f64,
    pub s_norm: f64,
    pub b_norm: f64,
    pub px_norm: f64,
    pub q_norm: f64,
    pub aty_norm: f64,
}

impl ResidualInfo {
    /// `(primal, dual)` thresholds of the stopping rule.
    pub fn thresholds(&self, settings: &Settings) -> (f64, f64) {
        let tp = settings.eps_abs + settings.eps_rel * self.ax_norm.max(self.s_norm).max(self.b_norm);
        let td = settings.eps_abs + settings.eps_rel * self.px_norm.max(self.q_norm).max(self.aty_norm);
        (tp, td)
    }

    /// Largest residual-to-threshold ratio; at most 1 means converged.
    pub fn score(&self, settings: &Settings) -> f64 {
        let (tp, td) = self.thresholds(settings);
        (self.r_prim_norm / tp).max(self.r_dual_norm / td)
    }
}

/// Evaluates the residuals of an unscaled triple.
pub fn residuals(problem: &ProblemData, x: &[f64], s: &[f64], y: &[f64]) -> ResidualInfo {
    let ax = problem.A.mul_vec(x);
    let mut px = vec![0.0; x.len()];
    if problem.P.is_upper_triangular() {
        problem.P.symv_upper(1.0, x, 0.0, &mut px);
    } else {
        problem.P.gemv(1.0, x, 0.0, &mut px);
    }
    let aty = problem.A.tmul_vec(y);
    let r_prim: Vec<f64> = ax.iter().zip(s).zip(&problem.b).map(|((a, s), b)| a + s - b).collect();
    let r_dual: Vec<f64> = px
        .iter()
        .zip(&problem.q)
        .zip(&aty)
        .map(|((p, q), a)| p + q - a)
        .collect();
    ResidualInfo {
        r_prim_norm: norm_inf(&r_prim),
        r_dual_norm: norm_inf(&r_dual),
        r_prim,
        r_dual,
        ax_norm: norm_inf(&ax),
        s_norm: norm_inf(s),
        b_norm: norm_inf(&problem.b),
        px_norm: norm_inf(&px),
        q_norm: norm_inf(&problem.q),
        aty_norm: norm_inf(&aty),
    }
}

/// Absolute plus relative stopping rule on both residuals.
pub fn check_termination(res: &ResidualInfo, settings: &Settings) -> bool {
    let (tp, td) = res.thresholds(settings);
    res.r_prim_norm <= tp && res.r_dual_norm <= td
}
