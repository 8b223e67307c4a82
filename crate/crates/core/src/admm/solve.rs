use std::time::Instant;

use super::infeasibility::{check_dual_infeasible, check_primal_infeasible};
use super::residuals::{check_termination, residuals, ResidualInfo};
use super::workspace::Workspace;
use crate::chordal::{decompose_auto, Decomposition};
use crate::error::{Result, SolverError};
use crate::model::{objective_value, validate, Certificate, ProblemData, Settings, SolveResult, Status, Timings};

/// Snapshot passed to the progress callback at every check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub iteration: usize,
    pub r_prim: f64,
    pub r_dual: f64,
    pub rho: f64,
    pub elapsed: f64,
}

/// Outcome of running the main loop on a workspace.
pub struct RunOutcome {
    pub status: Status,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub residuals: ResidualInfo,
    pub certificate: Option<Certificate>,
    pub iterate_time: f64,
}

/// Iterates until a stopping condition holds. Termination and
/// infeasibility are tested every `check_interval` steps; at a check where
/// both hold, `Solved` wins.
pub fn run(ws: &mut Workspace, callback: &mut dyn FnMut(&Progress), t_start: Instant) -> Result<RunOutcome> {
    let settings = ws.settings.clone();
    let interval = settings.check_interval.max(1);
    let t_loop = Instant::now();
    let mut prev_x = ws.x.clone();
    let mut prev_y = ws.y.clone();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, ResidualInfo)> = None;
    let mut last_rho_update = 0;
    let mut status = Status::MaxIterations;
    let mut certificate = None;
    let mut final_res = None;

    let max_iter = settings.max_iter;
    let mut k = 0;
    while k < max_iter {
        ws.iterate()?;
        k += 1;
        let timed_out = settings
            .time_limit
            .is_some_and(|tl| t_start.elapsed().as_secs_f64() > tl);
        if k % interval != 0 && k != max_iter && !timed_out {
            continue;
        }
        let (x, s, y) = ws.unscaled_iterates();
        let res = residuals(&ws.problem, &x, &s, &y);
        callback(&Progress {
            iteration: k,
            r_prim: res.r_prim_norm,
            r_dual: res.r_dual_norm,
            rho: ws.rho_base,
            elapsed: t_start.elapsed().as_secs_f64(),
        });
        if check_termination(&res, &settings) {
            status = Status::Solved;
            final_res = Some((x, s, y, res));
            break;
        }

        // differences since the previous check, mapped to original coordinates
        let dx: Vec<f64> = ws
            .x
            .iter()
            .zip(&prev_x)
            .zip(&ws.scaling.d)
            .map(|((a, b), d)| (a - b) * d)
            .collect();
        let dy_cert: Vec<f64> = ws
            .y
            .iter()
            .zip(&prev_y)
            .zip(&ws.scaling.u)
            .map(|((a, b), u)| -(a - b) * u)
            .collect();
        if let Some(c) = check_primal_infeasible(&dy_cert, &ws.problem, &settings) {
            status = Status::PrimalInfeasible;
            certificate = Some(Certificate::Primal(c));
            final_res = Some((x, s, y, res));
            break;
        }
        if let Some(c) = check_dual_infeasible(&dx, &ws.problem, &settings) {
            status = Status::DualInfeasible;
            certificate = Some(Certificate::Dual(c));
            final_res = Some((x, s, y, res));
            break;
        }
        prev_x.copy_from_slice(&ws.x);
        prev_y.copy_from_slice(&ws.y);

        let score = res.score(&settings);
        let rp_rel = res.r_prim_norm / res.thresholds(&settings).0;
        let rd_rel = res.r_dual_norm / res.thresholds(&settings).1;
        if best.as_ref().is_none_or(|b| score < b.0) {
            best = Some((score, x, s, y, res));
        }
        if timed_out {
            status = Status::TimeLimit;
            break;
        }
        if settings.adaptive_rho && k - last_rho_update >= settings.adaptive_rho_interval {
            // balance the relative residuals; skip small corrections to avoid refactoring
            let ratio = rp_rel / rd_rel.max(f64::MIN_POSITIVE);
            let factor = ratio.sqrt();
            #[allow(clippy::manual_range_contains)] // false for NaN
            let new_rho = (factor > 5.0 || factor < 0.2).then(|| ws.rho_base * factor);
            if let Some(r) = new_rho {
                ws.update_rho(r.clamp(1e-6, 1e6))?;
                last_rho_update = k;
            }
        }
    }

    let (x, s, y, res) = match final_res {
        Some(v) => v,
        None => {
            let (_, x, s, y, res) = best.ok_or_else(|| SolverError::Unsupported("no iterations performed".into()))?;
            (x, s, y, res)
        }
    };
    Ok(RunOutcome {
        status,
        x,
        s,
        y,
        iterations: k,
        residuals: res,
        certificate,
        iterate_time: t_loop.elapsed().as_secs_f64(),
    })
}

pub fn solve(problem: &ProblemData, settings: &Settings) -> Result<SolveResult> {
    solve_with_callback(problem, settings, &mut |_| {})
}

/// Full pipeline: optional chordal decomposition, scaling, iterations, and
/// mapping of the result back to the original problem.
pub fn solve_with_callback(
    problem: &ProblemData,
    settings: &Settings,
    callback: &mut dyn FnMut(&Progress),
) -> Result<SolveResult> {
    validate(problem).map_err(SolverError::InvalidProblem)?;
    settings.validate().map_err(SolverError::InvalidProblem)?;
    if settings.max_iter == 0 {
        return Err(SolverError::InvalidProblem(vec![crate::model::Violation::Setting(
            "max_iter must be at least 1".into(),
        )]));
    }
    let t_start = Instant::now();
    let decomposition: Option<Decomposition> = if settings.decompose {
        decompose_auto(problem, settings)?
    } else {
        None
    };
    let preprocess = t_start.elapsed().as_secs_f64();
    let working = decomposition.as_ref().map_or(problem, |d| &d.problem);

    let mut ws = Workspace::setup(working, settings)?;
    let out = run(&mut ws, callback, t_start)?;

    let t_post = Instant::now();
    let (x, s, y, certificate) = match &decomposition {
        None => (out.x, out.s, out.y, out.certificate),
        Some(d) => {
            let x = d.map.recover_x(&out.x);
            let s = d.map.recover_s(&out.s);
            let y = d.map.recover_y(&out.y, settings.complete_dual);
            let cert = out.certificate.map(|c| match c {
                Certificate::Primal(v) => Certificate::Primal(d.map.recover_y(&v, false)),
                Certificate::Dual(v) => Certificate::Dual(d.map.recover_x(&v)),
            });
            (x, s, y, cert)
        }
    };
    let res = if decomposition.is_some() {
        residuals(problem, &x, &s, &y)
    } else {
        out.residuals
    };
    let objective = match out.status {
        Status::PrimalInfeasible => f64::INFINITY,
        Status::DualInfeasible => f64::NEG_INFINITY,
        _ => objective_value(problem, &x)?,
    };
    let postprocess = t_post.elapsed().as_secs_f64();
    let timings = Timings {
        preprocess,
        setup: ws.setup_time,
        factor: ws.factor_time,
        iterate: out.iterate_time,
        projection: ws.projection_time,
        postprocess,
        total: t_start.elapsed().as_secs_f64(),
    };
    Ok(SolveResult {
        status: out.status,
        x,
        s,
        y,
        objective,
        iterations: out.iterations,
        r_prim: res.r_prim_norm,
        r_dual: res.r_dual_norm,
        certificate,
        timings,
        decomposition: decomposition.map(|d| d.info),
    })
}
