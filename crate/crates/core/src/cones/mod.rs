//! Projections onto the supported cones and sets, plus the membership and
//! support-function queries used by the infeasibility checks.

mod basic;
mod doubly_stochastic;
mod psd;

use std::sync::Arc;

use rayon::prelude::*;

pub use basic::{
    project_box, project_nonneg, project_soc, project_zero, BoxSet, NonnegCone, SecondOrderCone, ZeroCone,
};
pub use doubly_stochastic::{project_doubly_stochastic_affine, DoublyStochasticSet};
pub use psd::{project_psd_triangle, psd_min_eigenvalue, PsdTriangleCone};

use crate::error::{Result, SolverError};
use crate::linalg::sparse::{dot, norm_inf};
use crate::model::ConeSpec;

/// A closed convex set the slack variable can be constrained to.
///
/// Only `project` is mandatory. The remaining queries feed infeasibility
/// detection; returning `None` marks the answer as unknown and the solver
/// then skips the corresponding check instead of guessing.
pub trait ConeKernel: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Euclidean projection in place.
    fn project(&self, v: &mut [f64]) -> Result<()>;

    /// Whether the set is a cone (closed under positive scaling).
    fn is_cone(&self) -> bool {
        true
    }

    /// `v ∈ K*`, up to `tol · max(1, ‖v‖∞)` in distance.
    fn in_dual(&self, _v: &[f64], _tol: f64) -> Option<bool> {
        None
    }

    /// `v ∈ -K∞`, the recession cone of the negated set.
    fn in_recession_of_negated(&self, _v: &[f64], _tol: f64) -> Option<bool> {
        None
    }

    /// Support function `σ_K(w) = sup { <w, k> : k ∈ K }`, possibly `+∞`.
    fn support(&self, w: &[f64], tol: f64) -> Option<f64> {
        if !self.is_cone() {
            return None;
        }
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        self.in_dual(&neg, tol)
            .map(|inside| if inside { 0.0 } else { f64::INFINITY })
    }

    /// Support of `-K + {b}` at `y`, i.e. `b'y + σ_K(-y)`.
    fn support_shifted(&self, y: &[f64], b: &[f64], tol: f64) -> Option<f64> {
        if self.is_cone() {
            return self
                .in_dual(y, tol)
                .map(|inside| if inside { dot(b, y) } else { f64::INFINITY });
        }
        let neg: Vec<f64> = y.iter().map(|x| -x).collect();
        self.support(&neg, tol).map(|s| dot(b, y) + s)
    }
}

/// Relative membership threshold shared by all kernels.
#[inline]
pub(crate) fn within(dist: f64, v: &[f64], tol: f64) -> bool {
    dist <= tol * norm_inf(v).max(1.0)
}

/// Kernel implementing one cone descriptor.
pub fn kernel_for(spec: &ConeSpec) -> Arc<dyn ConeKernel> {
    match spec {
        ConeSpec::Zero(d) => Arc::new(ZeroCone::new(*d)),
        ConeSpec::Nonneg(d) => Arc::new(NonnegCone::new(*d)),
        ConeSpec::Box { lower, upper } => Arc::new(BoxSet::new(lower.clone(), upper.clone())),
        ConeSpec::SecondOrder(d) => Arc::new(SecondOrderCone::new(*d)),
        ConeSpec::PsdTriangle(d) => Arc::new(PsdTriangleCone::new(*d)),
        ConeSpec::Custom(k) => Arc::clone(k),
    }
}

/// A custom non-conic set seen through a uniform scaling `u`: the solver
/// works with `uC`, whose projection is `u Π_C(v / u)`.
struct UniformlyScaled {
    inner: Arc<dyn ConeKernel>,
    u: f64,
}

impl ConeKernel for UniformlyScaled {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn project(&self, v: &mut [f64]) -> Result<()> {
        v.iter_mut().for_each(|x| *x /= self.u);
        self.inner.project(v)?;
        v.iter_mut().for_each(|x| *x *= self.u);
        Ok(())
    }

    fn is_cone(&self) -> bool {
        false
    }
}

/// The Cartesian product of all cone blocks, ready for repeated projection.
#[derive(Clone)]
pub struct ConeSet {
    blocks: Vec<(usize, Arc<dyn ConeKernel>)>,
    dim: usize,
}

impl ConeSet {
    pub fn new(cones: &[ConeSpec]) -> Self {
        let mut blocks = Vec::with_capacity(cones.len());
        let mut off = 0;
        for c in cones {
            blocks.push((off, kernel_for(c)));
            off += c.dim();
        }
        Self { blocks, dim: off }
    }

    /// The set `U K` for a row scaling `u` that is constant on every block
    /// needing uniform scaling.
    pub fn scaled(cones: &[ConeSpec], u: &[f64]) -> Self {
        let mut blocks: Vec<(usize, Arc<dyn ConeKernel>)> = Vec::with_capacity(cones.len());
        let mut off = 0;
        for c in cones {
            let d = c.dim();
            let k: Arc<dyn ConeKernel> = match c {
                ConeSpec::Box { lower, upper } => {
                    let su = &u[off..off + d];
                    Arc::new(BoxSet::new(
                        lower.iter().zip(su).map(|(l, s)| l * s).collect(),
                        upper.iter().zip(su).map(|(h, s)| h * s).collect(),
                    ))
                }
                ConeSpec::Custom(k) if !k.is_cone() && d > 0 && u[off] != 1.0 => Arc::new(UniformlyScaled {
                    inner: Arc::clone(k),
                    u: u[off],
                }),
                other => kernel_for(other),
            };
            blocks.push((off, k));
            off += d;
        }
        Self { blocks, dim: off }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn segments<'a>(&'a self, v: &'a mut [f64]) -> Vec<(usize, &'a mut [f64], &'a Arc<dyn ConeKernel>)> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut rest = v;
        for (i, (_, k)) in self.blocks.iter().enumerate() {
            let (head, tail) = rest.split_at_mut(k.dim());
            out.push((i, head, k));
            rest = tail;
        }
        out
    }

    /// Projects every block of `v` in place, optionally fanning blocks out
    /// over a thread pool. Each block only touches its own range, so the
    /// result does not depend on scheduling.
    pub fn project(&self, v: &mut [f64], pool: Option<&rayon::ThreadPool>) -> Result<()> {
        if v.len() != self.dim {
            return Err(SolverError::DimensionMismatch {
                context: "cone projection",
                expected: self.dim,
                found: v.len(),
            });
        }
        let wrap = |(i, seg, k): (usize, &mut [f64], &Arc<dyn ConeKernel>)| {
            k.project(seg).map_err(|e| SolverError::Projection {
                block: i,
                source: Box::new(e),
            })
        };
        let segs = self.segments(v);
        match pool {
            Some(pool) if segs.len() > 1 => {
                let results: Vec<Result<()>> = pool.install(|| segs.into_par_iter().map(wrap).collect());
                results.into_iter().collect()
            }
            _ => segs.into_iter().map(wrap).collect(),
        }
    }
}

/// Projection of `v` onto the product of `cones`.
pub fn project_composite(v: &[f64], cones: &[ConeSpec]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    ConeSet::new(cones).project(&mut out, None)?;
    Ok(out)
}

/// Same as [`project_composite`] with blocks projected on `pool`.
pub fn project_composite_parallel(v: &[f64], cones: &[ConeSpec], pool: &rayon::ThreadPool) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    ConeSet::new(cones).project(&mut out, Some(pool))?;
    Ok(out)
}

/// `σ` of `-K + {b}` at `y`: `b'y` plus the support of every block at the
/// negated segment. `None` when some block cannot answer.
pub fn support_shifted_composite(y: &[f64], b: &[f64], cones: &[ConeSpec], tol: f64) -> Option<f64> {
    let mut total = 0.0;
    let mut off = 0;
    for c in cones {
        let d = c.dim();
        let k = kernel_for(c);
        total += k.support_shifted(&y[off..off + d], &b[off..off + d], tol)?;
        off += d;
    }
    Some(total)
}

/// `v ∈ -K∞` block by block. `None` when some block cannot answer.
pub fn in_recession_of_negated_composite(v: &[f64], cones: &[ConeSpec], tol: f64) -> Option<bool> {
    let mut off = 0;
    let mut all = true;
    for c in cones {
        let d = c.dim();
        match kernel_for(c).in_recession_of_negated(&v[off..off + d], tol) {
            Some(inside) => all &= inside,
            None => return None,
        }
        off += d;
    }
    Some(all)
}
