//! Seeded experiments, benchmark runs and the command line.

pub mod bench;
pub mod cli;
pub mod config;
pub mod report;
pub mod run;
pub mod seed;

pub use bench::{bench_problem, format_bench, run_bench, BenchEntry, BenchRow};
pub use cli::cli_main;
pub use config::{AlgorithmSpec, ExperimentConfig, OutputConfig, Source};
pub use report::{load_report, write_atomic, ExperimentReport, FitOutcome, TrialFailure};
pub use run::run_experiment;
pub use seed::derive_seed;
