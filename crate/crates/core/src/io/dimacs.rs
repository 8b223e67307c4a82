//! Normalised primal infeasibility, dual infeasibility and gap errors.

use crate::linalg::sparse::{dot, norm2};
use crate::model::{quad_form, ConeSpec, ProblemData, SolveResult};

/// Slack tolerance for treating a box row as active, relative to `1 + |b_i|`.
pub const ACTIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimacsErrors {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl DimacsErrors {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// Rows that take part in the error measures and the right-hand side used
/// for each. Nonnegative and box rows count only when the slack sits on a
/// bound; rows of the remaining cones are always active. The right-hand
/// side of an active row is `b_i - s_i`, which is the bound itself for
/// elementwise rows and keeps the conic slack in the residual otherwise.
pub fn active_rows(problem: &ProblemData, s: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut off = 0;
    for cone in &problem.cones {
        let d = cone.dim();
        for k in 0..d {
            let i = off + k;
            let tol = ACTIVE_TOL * (1.0 + problem.b[i].abs());
            let active = match cone {
                ConeSpec::Nonneg(_) => s[i] <= tol,
                ConeSpec::Box { lower, upper } => (s[i] - lower[k]).abs() <= tol || (upper[k] - s[i]).abs() <= tol,
                _ => true,
            };
            if active {
                rows.push(i);
            }
        }
        off += d;
    }
    let rhs = rows.iter().map(|&i| problem.b[i] - s[i]).collect();
    (rows, rhs)
}

/// Errors of the triple `(x, s, y)` on `problem`.
pub fn dimacs_errors_of(problem: &ProblemData, x: &[f64], s: &[f64], y: &[f64]) -> DimacsErrors {
    let (rows, b_a) = active_rows(problem, s);
    let ax = problem.A.mul_vec(x);
    let r_prim: Vec<f64> = rows.iter().zip(&b_a).map(|(&i, &bi)| ax[i] - bi).collect();
    let primal = norm2(&r_prim) / (1.0 + norm2(&b_a));

    let mut y_a = vec![0.0; problem.m()];
    for &i in &rows {
        y_a[i] = y[i];
    }
    let mut px = vec![0.0; problem.n()];
    problem.p_upper().symv_upper(1.0, x, 0.0, &mut px);
    let aty = problem.A.tmul_vec(&y_a);
    let r_dual: Vec<f64> = px.iter().zip(&problem.q).zip(&aty).map(|((p, q), a)| p + q - a).collect();
    let dual = norm2(&r_dual) / (1.0 + norm2(&problem.q));

    let qx = dot(&problem.q, x);
    let by: f64 = rows.iter().zip(&b_a).map(|(&i, &bi)| bi * y[i]).sum();
    let gap = (quad_form(&problem.P, x) + qx - by).abs() / (1.0 + qx.abs() + by.abs());
    DimacsErrors { primal, dual, gap }
}

pub fn dimacs_errors(problem: &ProblemData, result: &SolveResult) -> DimacsErrors {
    dimacs_errors_of(problem, &result.x, &result.s, &result.y)
}
