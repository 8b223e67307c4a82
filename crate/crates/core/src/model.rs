//! Problem data, cone descriptors, settings and results.

use std::fmt;
use std::sync::Arc;

use crate::cones::ConeKernel;
use crate::error::{Result, SolverError};
use crate::linalg::sparse::CscMatrix;
use crate::linalg::svec::triangular_side;

/// One block of the constraint cone.
#[derive(Clone)]
pub enum ConeSpec {
    Zero(usize),
    Nonneg(usize),
    Box { lower: Vec<f64>, upper: Vec<f64> },
    SecondOrder(usize),
    /// Positive semidefinite cone in vectorised upper-triangle form; the
    /// payload is the vector length `n(n+1)/2`.
    PsdTriangle(usize),
    Custom(Arc<dyn ConeKernel>),
}

impl ConeSpec {
    pub fn dim(&self) -> usize {
        match self {
            ConeSpec::Zero(d) | ConeSpec::Nonneg(d) | ConeSpec::SecondOrder(d) | ConeSpec::PsdTriangle(d) => *d,
            ConeSpec::Box { lower, .. } => lower.len(),
            ConeSpec::Custom(k) => k.dim(),
        }
    }

    /// Cones whose rows must share one scale factor under equilibration.
    pub fn needs_uniform_scaling(&self) -> bool {
        matches!(
            self,
            ConeSpec::SecondOrder(_) | ConeSpec::PsdTriangle(_) | ConeSpec::Custom(_)
        )
    }

    /// Side of the matrix for PSD blocks.
    pub fn psd_side(&self) -> Option<usize> {
        match self {
            ConeSpec::PsdTriangle(d) => triangular_side(*d),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConeSpec::Zero(_) => "zero",
            ConeSpec::Nonneg(_) => "nonneg",
            ConeSpec::Box { .. } => "box",
            ConeSpec::SecondOrder(_) => "soc",
            ConeSpec::PsdTriangle(_) => "psd",
            ConeSpec::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeSpec::Zero(d) => write!(f, "Zero({d})"),
            ConeSpec::Nonneg(d) => write!(f, "Nonneg({d})"),
            ConeSpec::Box { lower, upper } => f
                .debug_struct("Box")
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
            ConeSpec::SecondOrder(d) => write!(f, "SecondOrder({d})"),
            ConeSpec::PsdTriangle(d) => write!(f, "PsdTriangle({d})"),
            ConeSpec::Custom(k) => write!(f, "Custom({}, {})", k.name(), k.dim()),
        }
    }
}

impl PartialEq for ConeSpec {
    fn eq(&self, other: &Self) -> bool {
        use ConeSpec::*;
        match (self, other) {
            (Zero(a), Zero(b)) | (Nonneg(a), Nonneg(b)) | (SecondOrder(a), SecondOrder(b)) | (PsdTriangle(a), PsdTriangle(b)) => {
                a == b
            }
            (Box { lower: l1, upper: u1 }, Box { lower: l2, upper: u2 }) => l1 == l2 && u1 == u2,
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b) || (a.name() == b.name() && a.dim() == b.dim()),
            _ => false,
        }
    }
}

/// `minimize ½x'Px + q'x  subject to  Ax + s = b, s ∈ K`.
///
/// `P` may be given as its upper triangle or as the full symmetric matrix.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub P: CscMatrix,
    pub q: Vec<f64>,
    pub A: CscMatrix,
    pub b: Vec<f64>,
    pub cones: Vec<ConeSpec>,
}

impl ProblemData {
    /// Builds and validates a problem.
    #[allow(non_snake_case)]
    pub fn new(P: CscMatrix, q: Vec<f64>, A: CscMatrix, b: Vec<f64>, cones: Vec<ConeSpec>) -> Result<Self> {
        let pd = Self { P, q, A, b, cones };
        validate(&pd).map_err(SolverError::InvalidProblem)?;
        Ok(pd)
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Start offset of every cone block.
    pub fn cone_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cones.len());
        let mut off = 0;
        for c in &self.cones {
            out.push(off);
            off += c.dim();
        }
        out
    }

    /// `P` restricted to its upper triangle.
    pub fn p_upper(&self) -> CscMatrix {
        if self.P.is_upper_triangular() {
            self.P.clone()
        } else {
            self.P.upper_triangle()
        }
    }
}

/// One problem with a problem description.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    ConeDims { total: usize, m: usize },
    EmptyCone { block: usize },
    NotTriangular { block: usize, dim: usize },
    BoxLengths { block: usize, lower: usize, upper: usize },
    BoxOrder { block: usize, index: usize },
    NotSymmetric,
    Malformed { what: &'static str, msg: String },
    NonFinite { what: &'static str, index: usize },
    Setting(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension { what, expected, found } => {
                write!(f, "{what}: expected {expected}, found {found}")
            }
            Violation::ConeDims { total, m } => write!(f, "cone dims {total} ≠ m {m}"),
            Violation::EmptyCone { block } => write!(f, "cone block {block} has dimension 0"),
            Violation::NotTriangular { block, dim } => {
                write!(f, "cone block {block}: {dim} not triangular")
            }
            Violation::BoxLengths { block, lower, upper } => {
                write!(f, "box block {block}: {lower} lower vs {upper} upper bounds")
            }
            Violation::BoxOrder { block, index } => {
                write!(f, "box block {block}: lower > upper at entry {index}")
            }
            Violation::NotSymmetric => write!(f, "P is not symmetric"),
            Violation::Malformed { what, msg } => write!(f, "{what} is malformed: {msg}"),
            Violation::NonFinite { what, index } => write!(f, "{what}[{index}] is not finite"),
            Violation::Setting(s) => write!(f, "setting {s}"),
        }
    }
}

/// Returns every violation found; never panics on malformed input.
pub fn validate(pd: &ProblemData) -> std::result::Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    let n = pd.q.len();
    let m = pd.b.len();
    let p_ok = pd.P.check_format().map_err(|msg| v.push(Violation::Malformed { what: "P", msg })).is_ok();
    let a_ok = pd.A.check_format().map_err(|msg| v.push(Violation::Malformed { what: "A", msg })).is_ok();
    if pd.P.nrows != n || pd.P.ncols != n {
        v.push(Violation::Dimension {
            what: "P size vs length of q",
            expected: n,
            found: if pd.P.nrows != n { pd.P.nrows } else { pd.P.ncols },
        });
    } else if p_ok && !pd.P.is_symmetric_storage() {
        v.push(Violation::NotSymmetric);
    }
    if pd.A.ncols != n {
        v.push(Violation::Dimension {
            what: "columns of A",
            expected: n,
            found: pd.A.ncols,
        });
    }
    if pd.A.nrows != m {
        v.push(Violation::Dimension {
            what: "rows of A vs length of b",
            expected: m,
            found: pd.A.nrows,
        });
    }
    let total: usize = pd.cones.iter().map(|c| c.dim()).sum();
    if total != m {
        v.push(Violation::ConeDims { total, m });
    }
    for (block, c) in pd.cones.iter().enumerate() {
        if c.dim() == 0 {
            v.push(Violation::EmptyCone { block });
        }
        match c {
            ConeSpec::PsdTriangle(d) if *d > 0 && triangular_side(*d).is_none() => {
                v.push(Violation::NotTriangular { block, dim: *d });
            }
            ConeSpec::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    v.push(Violation::BoxLengths {
                        block,
                        lower: lower.len(),
                        upper: upper.len(),
                    });
                }
                for (index, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if !(l <= u) {
                        v.push(Violation::BoxOrder { block, index });
                    }
                }
            }
            _ => {}
        }
    }
    for (what, vals) in [("q", &pd.q), ("b", &pd.b)] {
        if let Some(index) = vals.iter().position(|x| !x.is_finite()) {
            v.push(Violation::NonFinite { what, index });
        }
    }
    if p_ok {
        if let Some(index) = pd.P.nzval.iter().position(|x| !x.is_finite()) {
            v.push(Violation::NonFinite { what: "P values", index });
        }
    }
    if a_ok {
        if let Some(index) = pd.A.nzval.iter().position(|x| !x.is_finite()) {
            v.push(Violation::NonFinite { what: "A values", index });
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// `½x'Px + q'x`, reading only the upper triangle of `P` or the full matrix
/// depending on how it was stored.
pub fn objective_value(pd: &ProblemData, x: &[f64]) -> Result<f64> {
    if x.len() != pd.n() {
        return Err(SolverError::DimensionMismatch {
            context: "objective_value",
            expected: pd.n(),
            found: x.len(),
        });
    }
    Ok(quad_form(&pd.P, x) * 0.5 + crate::linalg::dot(&pd.q, x))
}

/// `x'Px` for `P` stored either as upper triangle or in full.
pub(crate) fn quad_form(p: &CscMatrix, x: &[f64]) -> f64 {
    let upper_only = p.is_upper_triangular();
    let mut acc = 0.0;
    for (r, c, v) in p.iter() {
        if r == c {
            acc += v * x[r] * x[c];
        } else if upper_only {
            acc += 2.0 * v * x[r] * x[c];
        } else {
            acc += v * x[r] * x[c];
        }
    }
    acc
}

/// Weighting of clique-graph edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeWeight {
    /// `|Ci|³ + |Cj|³ - |Ci ∪ Cj|³`
    Nominal,
    /// `t(|Ci|) + t(|Cj|) - t(|Ci ∪ Cj|)` with `t(N) = aN³ + bN²`.
    Estimated { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MergeStrategy {
    None,
    ParentChild { t_fill: usize, t_size: usize },
    CliqueGraph(EdgeWeight),
    SparseColo { sigma_merge: f64 },
}

impl MergeStrategy {
    pub fn parent_child_default() -> Self {
        MergeStrategy::ParentChild { t_fill: 8, t_size: 8 }
    }

    pub fn sparsecolo_default() -> Self {
        MergeStrategy::SparseColo { sigma_merge: 0.4 }
    }
}

/// Solver settings. See [`Settings::default`] for the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub eps_prim_inf: f64,
    pub eps_dual_inf: f64,
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub max_iter: usize,
    pub check_interval: usize,
    /// Equilibration passes; 0 disables scaling.
    pub scaling_iters: usize,
    pub scaling_tol: f64,
    pub ruiz_tau: f64,
    /// Wall-clock limit in seconds; `None` means unlimited.
    pub time_limit: Option<f64>,
    pub decompose: bool,
    pub complete_dual: bool,
    pub merge_strategy: MergeStrategy,
    /// Multiplier applied to `rho` on equality rows; 1 gives a scalar `rho`.
    pub eq_rho_scale: f64,
    pub adaptive_rho: bool,
    pub adaptive_rho_interval: usize,
    /// Worker threads for the projection step; 1 runs sequentially, 0 uses
    /// all available cores.
    pub threads: usize,
    pub verbose: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            eps_abs: 1e-3,
            eps_rel: 1e-3,
            eps_prim_inf: 1e-5,
            eps_dual_inf: 1e-5,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            max_iter: 5000,
            check_interval: 25,
            scaling_iters: 10,
            scaling_tol: 1e-4,
            ruiz_tau: 1e-6,
            time_limit: None,
            decompose: true,
            complete_dual: true,
            merge_strategy: MergeStrategy::CliqueGraph(EdgeWeight::Nominal),
            eq_rho_scale: 1e3,
            adaptive_rho: true,
            adaptive_rho_interval: 25,
            threads: 1,
            verbose: false,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let mut pos = |name: &str, val: f64| {
            if !(val > 0.0 && val.is_finite()) {
                v.push(Violation::Setting(format!("{name} must be positive, got {val}")));
            }
        };
        pos("eps_abs", self.eps_abs);
        pos("eps_rel", self.eps_rel);
        pos("eps_prim_inf", self.eps_prim_inf);
        pos("eps_dual_inf", self.eps_dual_inf);
        pos("rho", self.rho);
        pos("sigma", self.sigma);
        pos("scaling_tol", self.scaling_tol);
        pos("ruiz_tau", self.ruiz_tau);
        pos("eq_rho_scale", self.eq_rho_scale);
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            v.push(Violation::Setting(format!("alpha must lie in (0, 2), got {}", self.alpha)));
        }
        if self.check_interval == 0 {
            v.push(Violation::Setting("check_interval must be at least 1".into()));
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                v.push(Violation::Setting(format!("time_limit must be positive, got {t}")));
            }
        }
        match self.merge_strategy {
            MergeStrategy::SparseColo { sigma_merge } if !(sigma_merge > 0.0) => {
                v.push(Violation::Setting("sigma_merge must be positive".into()));
            }
            _ => {}
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Solved,
    MaxIterations,
    TimeLimit,
    PrimalInfeasible,
    DualInfeasible,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Solved => "Solved",
            Status::MaxIterations => "MaxIterations",
            Status::TimeLimit => "TimeLimit",
            Status::PrimalInfeasible => "PrimalInfeasible",
            Status::DualInfeasible => "DualInfeasible",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Normalised infeasibility certificate on the original data.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `y` with `A'y = 0` and negative support value: the constraints are
    /// infeasible.
    Primal(Vec<f64>),
    /// Improving ray `x` with `Px = 0`, `q'x < 0` and `Ax` in the recession
    /// cone of the shifted constraint set.
    Dual(Vec<f64>),
}

/// Wall-clock breakdown in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    /// Chordal analysis, merging and problem transformation.
    pub preprocess: f64,
    /// Scaling, KKT assembly and factorisation.
    pub setup: f64,
    pub factor: f64,
    /// Main loop.
    pub iterate: f64,
    /// Share of `iterate` spent in projections.
    pub projection: f64,
    /// Mapping results back to the original problem.
    pub postprocess: f64,
    pub total: f64,
}

/// Summary of a chordal decomposition, when one was applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecompositionInfo {
    /// Number of PSD blocks that were split.
    pub decomposed_blocks: usize,
    pub clique_count: usize,
    pub max_clique: usize,
    /// Number of overlap variables added.
    pub overlaps: usize,
    pub merges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub r_prim: f64,
    pub r_dual: f64,
    pub certificate: Option<Certificate>,
    pub timings: Timings,
    pub decomposition: Option<DecompositionInfo>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims_problem(cones: Vec<ConeSpec>) -> ProblemData {
        ProblemData {
            P: CscMatrix::identity(2),
            q: vec![0.0; 2],
            A: CscMatrix::zeros(3, 2),
            b: vec![0.0; 3],
            cones,
        }
    }

    #[test]
    fn consistent_dims_pass() {
        assert!(validate(&dims_problem(vec![ConeSpec::Nonneg(3)])).is_ok());
    }

    #[test]
    fn cone_dim_mismatch_reported() {
        let err = validate(&dims_problem(vec![ConeSpec::Nonneg(2)])).unwrap_err();
        assert!(err.iter().any(|v| v.to_string() == "cone dims 2 ≠ m 3"));
    }

    #[test]
    fn non_triangular_psd_reported() {
        let mut pd = dims_problem(vec![ConeSpec::PsdTriangle(5)]);
        pd.A = CscMatrix::zeros(5, 2);
        pd.b = vec![0.0; 5];
        let err = validate(&pd).unwrap_err();
        assert!(err.iter().any(|v| v.to_string().contains("5 not triangular")));
    }

    #[test]
    fn malformed_input_is_diagnosed_not_panicking() {
        let mut pd = dims_problem(vec![ConeSpec::Box {
            lower: vec![1.0, 0.0],
            upper: vec![0.0],
        }]);
        pd.A.colptr = vec![0, 5];
        pd.q = vec![f64::NAN];
        let err = validate(&pd).unwrap_err();
        assert!(err.len() >= 4);
    }

    #[test]
    fn objective_examples() {
        let mut pd = dims_problem(vec![ConeSpec::Nonneg(3)]);
        assert_eq!(objective_value(&pd, &[1.0, 1.0]).unwrap(), 1.0);
        pd.P = CscMatrix::zeros(2, 2);
        pd.q = vec![2.0, 3.0];
        assert_eq!(objective_value(&pd, &[1.0, 1.0]).unwrap(), 5.0);
        assert!(objective_value(&pd, &[1.0]).is_err());
    }

    #[test]
    fn objective_independent_of_storage() {
        let full = CscMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let mut pd = dims_problem(vec![ConeSpec::Nonneg(3)]);
        pd.P = full.clone();
        let a = objective_value(&pd, &[0.7, -1.3]).unwrap();
        pd.P = full.upper_triangle();
        let b = objective_value(&pd, &[0.7, -1.3]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn default_settings_are_valid() {
        assert!(Settings::default().validate().is_ok());
        let s = Settings {
            alpha: 2.0,
            rho: 0.0,
            ..Settings::default()
        };
        assert_eq!(s.validate().unwrap_err().len(), 2);
    }
}
