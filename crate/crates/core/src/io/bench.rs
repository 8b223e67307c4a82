//! Benchmark rows, per-strategy aggregates and TSV output.

use std::fmt::Write as _;

use super::dimacs::dimacs_errors;
use crate::error::{Result, SolverError};
use crate::model::{EdgeWeight, MergeStrategy, ProblemData, Settings, Status};

/// `(∏(t + sh))^{1/n} - sh`; `None` entries and times above `cap` count as
/// `cap`. Returns 0 for an empty slice.
pub fn shifted_geometric_mean(times: &[Option<f64>], sh: f64, cap: f64) -> f64 {
    if times.is_empty() {
        return 0.0;
    }
    let log_sum: f64 = times
        .iter()
        .map(|t| (t.map_or(cap, |t| t.min(cap)) + sh).ln())
        .sum();
    (log_sum / times.len() as f64).exp() - sh
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub problem: String,
    pub strategy: String,
    pub status: Status,
    /// Total wall time in seconds.
    pub time: f64,
    pub iterations: usize,
    pub max_dimacs: f64,
    pub clique_count: usize,
    pub max_clique: usize,
}

impl BenchRow {
    pub fn solved(&self) -> bool {
        self.status == Status::Solved
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyAggregate {
    pub strategy: String,
    pub shifted_geometric_mean: f64,
    /// Fraction of problems not solved.
    pub failure_rate: f64,
    /// Problems on which this strategy had the lowest time among the
    /// strategies that solved it.
    pub fastest: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub sh: f64,
    pub cap: f64,
}

const HEADER: &str = "problem\tstrategy\tstatus\ttime\titerations\tmax_dimacs\tclique_count\tmax_clique";

impl BenchReport {
    pub fn new(sh: f64, cap: f64) -> Self {
        BenchReport { rows: Vec::new(), sh, cap }
    }

    /// Strategy names in order of first appearance.
    pub fn strategies(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.strategy) {
                out.push(r.strategy.clone());
            }
        }
        out
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.problem) {
                out.push(r.problem.clone());
            }
        }
        out
    }

    pub fn aggregates(&self) -> Vec<StrategyAggregate> {
        let problems = self.problems();
        let strategies = self.strategies();
        let mut fastest = vec![0usize; strategies.len()];
        for p in &problems {
            let best = self
                .rows
                .iter()
                .filter(|r| &r.problem == p && r.solved())
                .map(|r| r.time)
                .fold(f64::INFINITY, f64::min);
            for (k, s) in strategies.iter().enumerate() {
                if self.rows.iter().any(|r| &r.problem == p && &r.strategy == s && r.solved() && r.time == best) {
                    fastest[k] += 1;
                }
            }
        }
        strategies
            .iter()
            .zip(fastest)
            .map(|(s, fastest)| {
                let rows: Vec<&BenchRow> = self.rows.iter().filter(|r| &r.strategy == s).collect();
                let times: Vec<Option<f64>> = rows.iter().map(|r| r.solved().then_some(r.time)).collect();
                let failures = rows.iter().filter(|r| !r.solved()).count();
                StrategyAggregate {
                    strategy: s.clone(),
                    shifted_geometric_mean: shifted_geometric_mean(&times, self.sh, self.cap),
                    failure_rate: if rows.is_empty() { 0.0 } else { failures as f64 / rows.len() as f64 },
                    fastest,
                }
            })
            .collect()
    }

    /// Rows as TSV. Floats use shortest round-trip form so that
    /// [`BenchReport::from_tsv`] recovers them exactly.
    pub fn rows_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:?}\t{}\t{:?}\t{}\t{}",
                r.problem, r.strategy, r.status, r.time, r.iterations, r.max_dimacs, r.clique_count, r.max_clique
            );
        }
        out
    }

    pub fn aggregates_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "strategy\tsgm\tfailure_rate\tfastest\tsh\tcap");
        for a in self.aggregates() {
            let _ = writeln!(
                out,
                "{}\t{:?}\t{:?}\t{}\t{:?}\t{:?}",
                a.strategy, a.shifted_geometric_mean, a.failure_rate, a.fastest, self.sh, self.cap
            );
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        format!("{}\n{}", self.rows_tsv(), self.aggregates_tsv())
    }

    /// Parses the row table written by [`BenchReport::rows_tsv`].
    pub fn from_tsv(text: &str, sh: f64, cap: f64) -> Result<Self> {
        let mut report = BenchReport::new(sh, cap);
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == HEADER => {}
            _ => return Err(SolverError::Parse { line: 1, msg: "missing bench header".into() }),
        }
        for (k, line) in lines {
            if line.is_empty() {
                break;
            }
            let err = |msg: &str| SolverError::Parse { line: k + 1, msg: msg.into() };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 8 {
                return Err(err("expected 8 fields"));
            }
            let status = match f[2] {
                "Solved" => Status::Solved,
                "MaxIterations" => Status::MaxIterations,
                "TimeLimit" => Status::TimeLimit,
                "PrimalInfeasible" => Status::PrimalInfeasible,
                "DualInfeasible" => Status::DualInfeasible,
                _ => return Err(err("unknown status")),
            };
            report.rows.push(BenchRow {
                problem: f[0].to_string(),
                strategy: f[1].to_string(),
                status,
                time: f[3].parse().map_err(|_| err("bad time"))?,
                iterations: f[4].parse().map_err(|_| err("bad iteration count"))?,
                max_dimacs: f[5].parse().map_err(|_| err("bad error value"))?,
                clique_count: f[6].parse().map_err(|_| err("bad clique count"))?,
                max_clique: f[7].parse().map_err(|_| err("bad clique size"))?,
            });
        }
        Ok(report)
    }
}

/// The strategy columns compared by the benchmark: no decomposition, no
/// merging, parent-child merging and clique graph merging.
pub fn standard_strategies(base: &Settings) -> Vec<(String, Settings)> {
    // keep the caller's edge weighting when it already asks for clique graph merging
    let clique_graph = match base.merge_strategy {
        m @ MergeStrategy::CliqueGraph(_) => m,
        _ => MergeStrategy::CliqueGraph(EdgeWeight::Nominal),
    };
    let with = |decompose: bool, merge: MergeStrategy| Settings { decompose, merge_strategy: merge, ..base.clone() };
    vec![
        ("NoDe".into(), with(false, MergeStrategy::None)),
        ("NoMer".into(), with(true, MergeStrategy::None)),
        ("ParCh".into(), with(true, MergeStrategy::parent_child_default())),
        ("CG".into(), with(true, clique_graph)),
    ]
}

/// Solves one problem with one strategy and records the row. A solver
/// error is reported as a failure with the time spent so far.
pub fn bench_one(name: &str, strategy: &str, problem: &ProblemData, settings: &Settings) -> BenchRow {
    let start = std::time::Instant::now();
    match crate::admm::solve(problem, settings) {
        Ok(res) => {
            let (clique_count, max_clique) = res.decomposition.as_ref().map_or((0, 0), |d| (d.clique_count, d.max_clique));
            BenchRow {
                problem: name.to_string(),
                strategy: strategy.to_string(),
                status: res.status,
                time: res.timings.total,
                iterations: res.iterations,
                max_dimacs: dimacs_errors(problem, &res).max(),
                clique_count,
                max_clique,
            }
        }
        Err(_) => BenchRow {
            problem: name.to_string(),
            strategy: strategy.to_string(),
            status: Status::MaxIterations,
            time: start.elapsed().as_secs_f64(),
            iterations: 0,
            max_dimacs: f64::INFINITY,
            clique_count: 0,
            max_clique: 0,
        },
    }
}

/// Runs every strategy on every problem; rows follow input order, problem
/// major.
pub fn run_bench(problems: &[(String, ProblemData)], strategies: &[(String, Settings)], sh: f64, cap: f64) -> BenchReport {
    let mut report = BenchReport::new(sh, cap);
    for (name, p) in problems {
        for (sname, s) in strategies {
            let mut s = s.clone();
            s.time_limit = Some(s.time_limit.map_or(cap, |t| t.min(cap)));
            report.rows.push(bench_one(name, sname, p, &s));
        }
    }
    report
}
