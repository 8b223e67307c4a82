use std::time::Instant;

use super::residuals::{residuals, ResidualInfo};
use crate::cones::ConeSet;
use crate::error::{Result, SolverError};
use crate::linalg::kkt::kkt_assemble;
use crate::linalg::ldl::{ldl_factor, LdlFactors};
use crate::linalg::ruiz::{rescale, ruiz_equilibrate, unscale, ScaledData, ScalingState};
use crate::linalg::sparse::CscMatrix;
use crate::model::{ConeSpec, ProblemData, Settings};

/// Solver state for one problem: scaled data, cached factorisation and the
/// current iterates (all in scaled coordinates).
pub struct Workspace {
    pub(crate) problem: ProblemData,
    pub(crate) settings: Settings,
    pub(crate) scaling: ScalingState,
    pub(crate) data: ScaledData,
    pub(crate) cones: ConeSet,
    /// Base step size per constraint row before the equality multiplier.
    pub(crate) rho_base: f64,
    pub(crate) rho: Vec<f64>,
    pub(crate) rho_inv: Vec<f64>,
    pub(crate) factors: LdlFactors,
    pub(crate) pool: Option<rayon::ThreadPool>,

    pub(crate) x: Vec<f64>,
    pub(crate) s: Vec<f64>,
    pub(crate) y: Vec<f64>,
    pub(crate) x_tilde: Vec<f64>,
    pub(crate) s_tilde: Vec<f64>,
    rhs: Vec<f64>,
    work: Vec<f64>,
    v: Vec<f64>,

    pub(crate) iter: usize,
    pub(crate) setup_time: f64,
    pub(crate) factor_time: f64,
    pub(crate) projection_time: f64,
}

fn row_rho(cones: &[ConeSpec], rho: f64, eq_scale: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for c in cones {
        let r = if matches!(c, ConeSpec::Zero(_)) { rho * eq_scale } else { rho };
        out.extend(std::iter::repeat(r).take(c.dim()));
    }
    out
}

pub(crate) fn thread_pool(threads: usize) -> Option<rayon::ThreadPool> {
    let threads = std::env::var("CONIC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(threads);
    if threads == 1 {
        return None;
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
}

impl Workspace {
    /// Scales the problem, assembles and factors the KKT matrix, and sets all
    /// iterates to zero.
    pub fn setup(problem: &ProblemData, settings: &Settings) -> Result<Self> {
        crate::model::validate(problem).map_err(SolverError::InvalidProblem)?;
        settings.validate().map_err(SolverError::InvalidProblem)?;
        let t0 = Instant::now();
        let n = problem.n();
        let m = problem.m();
        let p_upper = problem.p_upper();
        let (scaling, data) = if settings.scaling_iters > 0 {
            ruiz_equilibrate(
                &p_upper,
                &problem.q,
                &problem.A,
                &problem.b,
                &problem.cones,
                settings.scaling_iters,
                settings.scaling_tol,
                settings.ruiz_tau,
            )
        } else {
            let st = ScalingState::identity(n, m);
            let d = st.scale(&p_upper, &problem.q, &problem.A, &problem.b);
            (st, d)
        };
        let cones = ConeSet::scaled(&problem.cones, &scaling.u);
        let rho = row_rho(&problem.cones, settings.rho, settings.eq_rho_scale);
        let rho_inv = rho.iter().map(|r| 1.0 / r).collect();
        let tf = Instant::now();
        let factors = factor_kkt(&data.p, &data.a, settings.sigma, &rho)?;
        let factor_time = tf.elapsed().as_secs_f64();
        let ws = Self {
            problem: problem.clone(),
            settings: settings.clone(),
            scaling,
            data,
            cones,
            rho_base: settings.rho,
            rho,
            rho_inv,
            factors,
            pool: thread_pool(settings.threads),
            x: vec![0.0; n],
            s: vec![0.0; m],
            y: vec![0.0; m],
            x_tilde: vec![0.0; n],
            s_tilde: vec![0.0; m],
            rhs: vec![0.0; n + m],
            work: vec![0.0; n + m],
            v: vec![0.0; m],
            iter: 0,
            setup_time: t0.elapsed().as_secs_f64(),
            factor_time,
            projection_time: 0.0,
        };
        Ok(ws)
    }

    /// Starts from a given unscaled triple instead of zero.
    pub fn warm_start(&mut self, x: &[f64], s: &[f64], y: &[f64]) -> Result<()> {
        for (what, got, want) in [("warm start x", x.len(), self.x.len()), ("warm start s", s.len(), self.s.len()), ("warm start y", y.len(), self.y.len())] {
            if got != want {
                return Err(SolverError::DimensionMismatch {
                    context: what,
                    expected: want,
                    found: got,
                });
            }
        }
        let (xh, sh, yh) = rescale(&self.scaling, x, s, y);
        self.x = xh;
        self.s = sh;
        self.y = yh;
        Ok(())
    }

    pub fn scaling(&self) -> &ScalingState {
        &self.scaling
    }

    pub fn factors(&self) -> &LdlFactors {
        &self.factors
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    pub fn problem(&self) -> &ProblemData {
        &self.problem
    }

    /// Scaled iterates `(x, s, y)`.
    pub fn scaled_iterates(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.x, &self.s, &self.y)
    }

    /// Scaled auxiliary iterates `(x̃, s̃)` from the last step.
    pub fn auxiliary_iterates(&self) -> (&[f64], &[f64]) {
        (&self.x_tilde, &self.s_tilde)
    }

    /// Current iterates mapped back to the original problem.
    pub fn unscaled_iterates(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        unscale(&self.scaling, &self.x, &self.s, &self.y)
    }

    /// One ADMM step:
    /// solve the KKT system, form `s̃`, relax, project, update `y`.
    pub fn iterate(&mut self) -> Result<()> {
        let n = self.x.len();
        let m = self.s.len();
        let sigma = self.settings.sigma;
        let alpha = self.settings.alpha;
        for i in 0..n {
            self.rhs[i] = sigma * self.x[i] - self.data.q[i];
        }
        for i in 0..m {
            self.rhs[n + i] = self.data.b[i] - self.s[i] + self.y[i] * self.rho_inv[i];
        }
        self.factors.solve_in_place(&mut self.rhs, &mut self.work);
        let (xt, nu) = self.rhs.split_at(n);
        self.x_tilde.copy_from_slice(xt);
        for i in 0..m {
            self.s_tilde[i] = self.s[i] - (nu[i] + self.y[i]) * self.rho_inv[i];
        }
        for i in 0..n {
            self.x[i] = alpha * self.x_tilde[i] + (1.0 - alpha) * self.x[i];
        }
        // relaxed slack, shifted by y/rho before projection
        for i in 0..m {
            let relaxed = alpha * self.s_tilde[i] + (1.0 - alpha) * self.s[i];
            self.v[i] = relaxed + self.y[i] * self.rho_inv[i];
            self.s[i] = relaxed;
        }
        let tp = Instant::now();
        let mut s_new = std::mem::take(&mut self.work);
        s_new.truncate(m);
        s_new.copy_from_slice(&self.v);
        let proj = self.cones.project(&mut s_new, self.pool.as_ref());
        self.projection_time += tp.elapsed().as_secs_f64();
        proj?;
        for i in 0..m {
            self.y[i] += self.rho[i] * (self.s[i] - s_new[i]);
        }
        self.s.copy_from_slice(&s_new);
        s_new.resize(n + m, 0.0);
        self.work = s_new;
        self.iter += 1;
        Ok(())
    }

    /// Residuals of the current iterate on the original data.
    pub fn compute_residuals(&self) -> ResidualInfo {
        let (x, s, y) = self.unscaled_iterates();
        residuals(&self.problem, &x, &s, &y)
    }

    /// Changes the base step size and refactors.
    pub fn update_rho(&mut self, rho: f64) -> Result<()> {
        self.rho_base = rho;
        self.rho = row_rho(&self.problem.cones, rho, self.settings.eq_rho_scale);
        self.rho_inv = self.rho.iter().map(|r| 1.0 / r).collect();
        let tf = Instant::now();
        self.factors = factor_kkt(&self.data.p, &self.data.a, self.settings.sigma, &self.rho)?;
        self.factor_time += tf.elapsed().as_secs_f64();
        Ok(())
    }
}

fn factor_kkt(p: &CscMatrix, a: &CscMatrix, sigma: f64, rho: &[f64]) -> Result<LdlFactors> {
    let k = kkt_assemble(p, a, sigma, rho)?;
    ldl_factor(&k, p.ncols)
}
