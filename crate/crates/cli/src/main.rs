use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use conic_admm::chordal::{build_clique_tree, chordal_extension, SparsityPattern};
use conic_admm::io::generators::{self, DoublyStochasticForm};
use conic_admm::io::{self, BenchReport};
use conic_admm::merging::{
    build_reduced_clique_graph, calibrate_estimated_weight, clique_graph_merge, merge_tree, recover_clique_tree,
};
use conic_admm::{solve_with_callback, EdgeWeight, MergeStrategy, Settings, Status};

const THREADS_ENV: &str = "CONIC_THREADS";

#[derive(Parser)]
#[command(name = "conic", version, about = "ADMM solver for conic programs with chordal decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Merge {
    None,
    ParentChild,
    CliqueGraph,
    Sparsecolo,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    Nominal,
    Estimated,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    BlockArrow,
    NearestCorr,
    DoublyStochasticQp,
    DoublyStochasticCustom,
    RandomQp,
}

#[derive(clap::Args)]
struct MergeArgs {
    /// Clique merging strategy.
    #[arg(long, value_enum, default_value = "clique-graph")]
    merge: Merge,
    /// Edge weighting for clique graph merging.
    #[arg(long, value_enum, default_value = "nominal")]
    weights: Weights,
}

impl MergeArgs {
    fn strategy(&self) -> MergeStrategy {
        match self.merge {
            Merge::None => MergeStrategy::None,
            Merge::ParentChild => MergeStrategy::parent_child_default(),
            Merge::Sparsecolo => MergeStrategy::sparsecolo_default(),
            Merge::CliqueGraph => MergeStrategy::CliqueGraph(match self.weights {
                Weights::Nominal => EdgeWeight::Nominal,
                Weights::Estimated => calibrate_estimated_weight(3),
            }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file (native format, or SDPA for .dat-s/.sdpa).
    Solve {
        file: PathBuf,
        #[arg(long)]
        eps_abs: Option<f64>,
        #[arg(long)]
        eps_rel: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, value_enum, default_value = "on")]
        decompose: OnOff,
        #[command(flatten)]
        merge: MergeArgs,
        /// Write the solution and statistics as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// Projection threads (0 uses every core). Defaults to $CONIC_THREADS or 1.
        #[arg(long)]
        threads: Option<usize>,
        /// Suppress progress output on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Report the clique tree of a sparsity pattern before and after merging.
    Analyze {
        /// Coordinate list: first line `n`, then one 1-based `i j` edge per line.
        pattern: PathBuf,
        #[command(flatten)]
        merge: MergeArgs,
    },
    /// Solve every problem in a directory with each decomposition strategy.
    Bench {
        dir: PathBuf,
        /// Time charged to failed runs, in seconds; also the per-run time limit.
        #[arg(long, default_value_t = 300.0)]
        cap: f64,
        /// Shift of the geometric mean.
        #[arg(long, default_value_t = 10.0)]
        sh: f64,
        /// Runs per problem and strategy; the median time is reported.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Write a generated problem in the native format.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        /// Output file.
        out: PathBuf,
        /// Problem size: matrix side for nearest-corr and doubly stochastic,
        /// number of blocks for block-arrow.
        #[arg(long, default_value_t = 10)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?)),
        Err(_) => Ok(None),
    }
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Solved => 0,
        Status::PrimalInfeasible | Status::DualInfeasible => 2,
        Status::MaxIterations | Status::TimeLimit => 3,
    }
}

fn run_solve(file: &Path, settings: Settings, json_out: Option<&Path>, quiet: bool) -> Result<u8> {
    let (problem, known) = io::read_any(file).with_context(|| format!("reading {}", file.display()))?;
    let mut progress = |p: &conic_admm::Progress| {
        if !quiet {
            eprintln!(
                "iter {:>6}  r_prim {:9.3e}  r_dual {:9.3e}  rho {:8.2e}  {:7.3} s",
                p.iteration, p.r_prim, p.r_dual, p.rho, p.elapsed
            );
        }
    };
    let res = solve_with_callback(&problem, &settings, &mut progress)?;
    println!("status      {}", res.status);
    println!("objective   {}", res.objective);
    if let Some(v) = known {
        println!("known       {v}");
    }
    println!("iterations  {}", res.iterations);
    println!("r_prim      {:.3e}", res.r_prim);
    println!("r_dual      {:.3e}", res.r_dual);
    println!("time        {:.4} s", res.timings.total);
    if let Some(d) = &res.decomposition {
        println!(
            "cliques     {} (max {}), overlaps {}, merges {}",
            d.clique_count, d.max_clique, d.overlaps, d.merges
        );
    }
    if let Some(path) = json_out {
        let errors = io::dimacs_errors(&problem, &res);
        let t = &res.timings;
        let doc = json!({
            "status": res.status.as_str(),
            "objective": res.objective,
            "iterations": res.iterations,
            "r_prim": res.r_prim,
            "r_dual": res.r_dual,
            "dimacs": { "primal": errors.primal, "dual": errors.dual, "gap": errors.gap },
            "timings": {
                "preprocess": t.preprocess, "setup": t.setup, "factor": t.factor, "iterate": t.iterate,
                "projection": t.projection, "postprocess": t.postprocess, "total": t.total,
            },
            "decomposition": res.decomposition.as_ref().map(|d| json!({
                "cliques": d.clique_count, "max_clique": d.max_clique, "overlaps": d.overlaps, "merges": d.merges,
            })),
            "x": res.x,
            "s": res.s,
            "y": res.y,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(exit_code(res.status))
}

fn one_based(c: &[usize]) -> String {
    let v: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn run_analyze(path: &Path, merge: &MergeArgs) -> Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pattern = SparsityPattern::from_coordinate_list(&text)?;
    let extended = chordal_extension(&pattern);
    let tree = build_clique_tree(&extended)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "vertices        {}", pattern.n())?;
    writeln!(out, "edges           {} ({} after extension)", pattern.edge_count(), extended.edge_count())?;
    writeln!(out, "cliques         {}", tree.len())?;
    writeln!(out, "max clique      {}", tree.max_clique())?;
    writeln!(out, "overlaps        {}", tree.overlap_count())?;
    let strategy = merge.strategy();
    let merged = if let MergeStrategy::CliqueGraph(w) = strategy {
        let mut g = build_reduced_clique_graph(&tree, w);
        let log = clique_graph_merge(&mut g);
        for e in &log {
            writeln!(out, "merge           {} + {}  weight {}", one_based(&e.first), one_based(&e.second), e.weight)?;
        }
        if log.is_empty() {
            tree
        } else {
            recover_clique_tree(&g)?
        }
    } else {
        merge_tree(tree, &strategy)?.0
    };
    writeln!(out, "merged cliques  {}", merged.len())?;
    writeln!(out, "merged max      {}", merged.max_clique())?;
    writeln!(out, "merged overlaps {}", merged.overlap_count())?;
    for (l, c) in merged.cliques().iter().enumerate() {
        let parent = merged.parent(l).map_or("-".to_string(), |p| p.to_string());
        writeln!(out, "clique {l:>4}     {}  parent {parent}", one_based(c))?;
    }
    Ok(0)
}

fn problem_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no problem files in {}", dir.display());
    }
    Ok(files)
}

fn run_bench(dir: &Path, cap: f64, sh: f64, repeat: usize, eps: Option<f64>, format: Format) -> Result<u8> {
    let mut base = Settings { threads: threads_from_env()?.unwrap_or(1), ..Settings::default() };
    if let Some(e) = eps {
        base.eps_abs = e;
        base.eps_rel = e;
    }
    base.time_limit = Some(cap);
    let strategies = io::standard_strategies(&base);
    let mut report = BenchReport::new(sh, cap);
    for path in problem_files(dir)? {
        let problem = match io::read_any(&path) {
            Ok((p, _)) => p,
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("?").to_string();
        for (sname, s) in &strategies {
            eprintln!("{name} / {sname}");
            let mut runs: Vec<_> = (0..repeat.max(1)).map(|_| io::bench_one(&name, sname, &problem, s)).collect();
            runs.sort_by(|a, b| a.time.total_cmp(&b.time));
            report.rows.push(runs.swap_remove(runs.len() / 2));
        }
    }
    if report.rows.is_empty() {
        bail!("no readable problem files in {}", dir.display());
    }
    match format {
        Format::Tsv => print!("{}", report.to_tsv()),
        Format::Json => {
            let rows: Vec<_> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "problem": r.problem, "strategy": r.strategy, "status": r.status.as_str(), "time": r.time,
                        "iterations": r.iterations, "max_dimacs": r.max_dimacs, "clique_count": r.clique_count,
                        "max_clique": r.max_clique,
                    })
                })
                .collect();
            let aggregates: Vec<_> = report
                .aggregates()
                .iter()
                .map(|a| {
                    json!({
                        "strategy": a.strategy, "shifted_geometric_mean": a.shifted_geometric_mean,
                        "failure_rate": a.failure_rate, "fastest": a.fastest,
                    })
                })
                .collect();
            let doc = json!({ "sh": sh, "cap": cap, "rows": rows, "aggregates": aggregates });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(0)
}

fn run_generate(kind: Kind, out: &Path, size: usize, seed: u64) -> Result<u8> {
    let g = match kind {
        Kind::BlockArrow => generators::block_arrow(4, size, 3, 20, seed),
        Kind::NearestCorr => generators::nearest_corr(size, seed),
        Kind::DoublyStochasticQp => generators::doubly_stochastic(size, seed, DoublyStochasticForm::Qp),
        Kind::DoublyStochasticCustom => generators::doubly_stochastic(size, seed, DoublyStochasticForm::Custom),
        Kind::RandomQp => generators::random_qp(seed).0,
    };
    io::write_problem_file(out, &g.problem, None)?;
    eprintln!("wrote {} (objective offset {})", g.name, g.objective_offset);
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            file,
            eps_abs,
            eps_rel,
            rho,
            sigma,
            alpha,
            max_iter,
            time_limit,
            decompose,
            merge,
            json_out,
            threads,
            quiet,
        } => {
            let d = Settings::default();
            let settings = Settings {
                eps_abs: eps_abs.unwrap_or(d.eps_abs),
                eps_rel: eps_rel.unwrap_or(d.eps_rel),
                rho: rho.unwrap_or(d.rho),
                sigma: sigma.unwrap_or(d.sigma),
                alpha: alpha.unwrap_or(d.alpha),
                max_iter: max_iter.unwrap_or(d.max_iter),
                time_limit,
                decompose: matches!(decompose, OnOff::On),
                merge_strategy: merge.strategy(),
                threads: match threads {
                    Some(t) => t,
                    None => threads_from_env()?.unwrap_or(1),
                },
                ..d
            };
            run_solve(&file, settings, json_out.as_deref(), quiet)
        }
        Command::Analyze { pattern, merge } => run_analyze(&pattern, &merge),
        Command::Bench { dir, cap, sh, repeat, eps, format } => run_bench(&dir, cap, sh, repeat, eps, format),
        Command::Generate { kind, out, size, seed } => run_generate(kind, &out, size, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
