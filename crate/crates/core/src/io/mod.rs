//! File formats, error measures, benchmark statistics and problem
//! generators.

pub mod bench;
pub mod dimacs;
pub mod generators;
pub mod native;
pub mod sdpa;

pub use bench::{bench_one, run_bench, shifted_geometric_mean, standard_strategies, BenchReport, BenchRow, StrategyAggregate};
pub use dimacs::{active_rows, ACTIVE_TOL, dimacs_errors, dimacs_errors_of, DimacsErrors};
pub use native::{read_any, read_problem, read_problem_file, write_problem, write_problem_file, FORMAT_VERSION};
pub use sdpa::{read_sdpa, read_sdpa_str, read_sdpa_with_header, write_sdpa, SdpaHeader};
