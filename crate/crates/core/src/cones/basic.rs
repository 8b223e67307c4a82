use super::{within, ConeKernel};
use crate::error::Result;
use crate::linalg::sparse::norm2;

pub fn project_zero(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = 0.0);
}

pub fn project_nonneg(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// Clamps `v` to `[l, u]` elementwise.
pub fn project_box(v: &mut [f64], l: &[f64], u: &[f64]) {
    for ((x, lo), hi) in v.iter_mut().zip(l).zip(u) {
        *x = x.max(*lo).min(*hi);
    }
}

/// Projection onto `{(t, x) : ‖x‖ ≤ t}`.
pub fn project_soc(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let t = v[0];
    let nx = norm2(&v[1..]);
    if nx <= t {
        return;
    }
    if nx <= -t {
        project_zero(v);
        return;
    }
    let a = 0.5 * (t + nx);
    v[0] = a;
    let f = a / nx;
    v[1..].iter_mut().for_each(|x| *x *= f);
}

#[derive(Debug, Clone)]
pub struct ZeroCone {
    dim: usize,
}

impl ZeroCone {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl ConeKernel for ZeroCone {
    fn name(&self) -> &str {
        "zero"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, v: &mut [f64]) -> Result<()> {
        project_zero(v);
        Ok(())
    }

    fn in_dual(&self, _v: &[f64], _tol: f64) -> Option<bool> {
        Some(true)
    }

    fn in_recession_of_negated(&self, v: &[f64], tol: f64) -> Option<bool> {
        Some(within(norm2(v), v, tol))
    }
}

#[derive(Debug, Clone)]
pub struct NonnegCone {
    dim: usize,
}

impl NonnegCone {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl ConeKernel for NonnegCone {
    fn name(&self) -> &str {
        "nonneg"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, v: &mut [f64]) -> Result<()> {
        project_nonneg(v);
        Ok(())
    }

    fn in_dual(&self, v: &[f64], tol: f64) -> Option<bool> {
        let dist = v.iter().map(|x| x.min(0.0).powi(2)).sum::<f64>().sqrt();
        Some(within(dist, v, tol))
    }

    fn in_recession_of_negated(&self, v: &[f64], tol: f64) -> Option<bool> {
        let dist = v.iter().map(|x| x.max(0.0).powi(2)).sum::<f64>().sqrt();
        Some(within(dist, v, tol))
    }
}

/// The box `{ s : l ≤ s ≤ u }`; bounds may be infinite.
#[derive(Debug, Clone)]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

impl ConeKernel for BoxSet {
    fn name(&self) -> &str {
        "box"
    }

    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn project(&self, v: &mut [f64]) -> Result<()> {
        project_box(v, &self.lower, &self.upper);
        Ok(())
    }

    fn is_cone(&self) -> bool {
        false
    }

    /// `Σ u_i max(w_i, 0) + l_i min(w_i, 0)`; components below the relative
    /// tolerance count as zero so an infinite bound does not blow up on noise.
    fn support(&self, w: &[f64], tol: f64) -> Option<f64> {
        let thresh = tol * crate::linalg::norm_inf(w).max(1.0);
        let mut acc = 0.0;
        for ((&wi, &lo), &hi) in w.iter().zip(&self.lower).zip(&self.upper) {
            if wi > thresh {
                acc += hi * wi;
            } else if wi < -thresh {
                acc += lo * wi;
            } else {
                // |w_i| tiny: contributes only where the bound is finite
                if wi > 0.0 && hi.is_finite() {
                    acc += hi * wi;
                } else if wi < 0.0 && lo.is_finite() {
                    acc += lo * wi;
                }
            }
        }
        Some(acc)
    }

    /// Per component, the recession cone of the box is `R` (both bounds
    /// infinite), `R+` (only the upper bound infinite), `R-` (only the lower
    /// bound infinite) or `{0}`; membership is checked for `-v`.
    fn in_recession_of_negated(&self, v: &[f64], tol: f64) -> Option<bool> {
        let mut dist2 = 0.0;
        for ((&vi, &lo), &hi) in v.iter().zip(&self.lower).zip(&self.upper) {
            let w = -vi;
            let d = match (lo.is_finite(), hi.is_finite()) {
                (false, false) => 0.0,
                (true, false) => w.min(0.0),
                (false, true) => w.max(0.0),
                (true, true) => w,
            };
            dist2 += d * d;
        }
        Some(within(dist2.sqrt(), v, tol))
    }
}

#[derive(Debug, Clone)]
pub struct SecondOrderCone {
    dim: usize,
}

impl SecondOrderCone {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

fn soc_distance(v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    project_soc(&mut p);
    p.iter_mut().zip(v).for_each(|(a, b)| *a -= b);
    norm2(&p)
}

impl ConeKernel for SecondOrderCone {
    fn name(&self) -> &str {
        "soc"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, v: &mut [f64]) -> Result<()> {
        project_soc(v);
        Ok(())
    }

    fn in_dual(&self, v: &[f64], tol: f64) -> Option<bool> {
        Some(within(soc_distance(v), v, tol))
    }

    fn in_recession_of_negated(&self, v: &[f64], tol: f64) -> Option<bool> {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        Some(within(soc_distance(&neg), v, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cone_examples() {
        let mut v = [1.0, -2.0];
        project_zero(&mut v);
        assert_eq!(v, [0.0, 0.0]);
        let z = ZeroCone::new(2);
        assert_eq!(z.in_dual(&[5.0, -5.0], 1e-9), Some(true));
        assert_eq!(z.in_recession_of_negated(&[0.0, 0.0], 1e-9), Some(true));
        assert_eq!(z.in_recession_of_negated(&[1.0, 0.0], 1e-9), Some(false));
    }

    #[test]
    fn nonneg_examples() {
        let mut v = [1.0, -2.0, 0.0];
        project_nonneg(&mut v);
        assert_eq!(v, [1.0, 0.0, 0.0]);
        let k = NonnegCone::new(2);
        assert_eq!(k.in_dual(&[1.0, 1.0], 1e-9), Some(true));
        assert_eq!(k.in_dual(&[-1.0, 1.0], 1e-9), Some(false));
    }

    #[test]
    fn box_examples() {
        let mut v = [2.0, -2.0];
        project_box(&mut v, &[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(v, [1.0, 0.0]);
        let mut w = [0.3, 0.7];
        project_box(&mut w, &[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(w, [0.3, 0.7]);
        let b = BoxSet::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(b.support(&[1.0, -1.0], 1e-9), Some(1.0));
        assert_eq!(b.support_shifted(&[-1.0, 1.0], &[0.0, 0.0], 1e-9), Some(1.0));
    }

    #[test]
    fn box_with_infinite_bound() {
        let b = BoxSet::new(vec![0.0], vec![f64::INFINITY]);
        assert_eq!(b.support(&[1.0], 1e-9), Some(f64::INFINITY));
        assert_eq!(b.support(&[-1.0], 1e-9), Some(0.0));
        // recession cone R+, so -v must be >= 0
        assert_eq!(b.in_recession_of_negated(&[-1.0], 1e-9), Some(true));
        assert_eq!(b.in_recession_of_negated(&[1.0], 1e-9), Some(false));
    }

    #[test]
    fn soc_examples() {
        let mut a = [2.0, 1.0, 0.0];
        project_soc(&mut a);
        assert_eq!(a, [2.0, 1.0, 0.0]);
        let mut b = [-2.0, 1.0, 0.0];
        project_soc(&mut b);
        assert_eq!(b, [0.0, 0.0, 0.0]);
        let mut c = [0.0, 1.0, 0.0];
        project_soc(&mut c);
        assert_eq!(c, [0.5, 0.5, 0.0]);
    }
}
