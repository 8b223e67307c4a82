//! Infeasibility certificate tests on unscaled data.
//!
//! Both tests take the candidate direction with the sign of the certificate
//! set itself: `dy` should satisfy `A'dy = 0` with a negative support value,
//! `dx` should satisfy `P dx = 0`, `q'dx < 0` and `A dx ∈ -K∞`.

use crate::cones::{in_recession_of_negated_composite, support_shifted_composite};
use crate::linalg::sparse::{dot, norm_inf};
use crate::model::{ProblemData, Settings};

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let nv = norm_inf(v);
    if !(nv > 0.0) || !nv.is_finite() {
        return None;
    }
    Some(v.iter().map(|x| x / nv).collect())
}

/// Returns the normalised certificate when `dy` proves primal
/// infeasibility within `eps_prim_inf`.
pub fn check_primal_infeasible(dy: &[f64], problem: &ProblemData, settings: &Settings) -> Option<Vec<f64>> {
    let eps = settings.eps_prim_inf;
    let w = normalized(dy)?;
    if norm_inf(&problem.A.tmul_vec(&w)) > eps {
        return None;
    }
    let sigma = support_shifted_composite(&w, &problem.b, &problem.cones, eps)?;
    (sigma <= eps).then_some(w)
}

/// Returns the normalised certificate when `dx` proves dual infeasibility
/// within `eps_dual_inf`.
pub fn check_dual_infeasible(dx: &[f64], problem: &ProblemData, settings: &Settings) -> Option<Vec<f64>> {
    let eps = settings.eps_dual_inf;
    let w = normalized(dx)?;
    let mut pw = vec![0.0; w.len()];
    if problem.P.is_upper_triangular() {
        problem.P.symv_upper(1.0, &w, 0.0, &mut pw);
    } else {
        problem.P.gemv(1.0, &w, 0.0, &mut pw);
    }
    if norm_inf(&pw) > eps || dot(&problem.q, &w) > eps {
        return None;
    }
    let aw = problem.A.mul_vec(&w);
    in_recession_of_negated_composite(&aw, &problem.cones, eps)?.then_some(w)
}
