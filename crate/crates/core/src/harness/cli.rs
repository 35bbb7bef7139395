//! `onlinelp` command line.
//!
//! Exit codes: 0 on success, 1 for bad arguments, configs or input files,
//! 2 when a run fails after starting (solver failures, failed trials).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::generators::{generate, GeneratorSpec};
use crate::instance::Instance;
use crate::simplex::{solve_binary_exact, solve_relaxation, ENUMERATION_LIMIT};

use super::bench::{format_bench, run_bench};
use super::config::ExperimentConfig;
use super::run::run_experiment;

#[derive(Parser, Debug)]
#[command(name = "onlinelp", version, about = "Online binary LP algorithms and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a seeded experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Worker threads; overrides the config and ONLINELP_THREADS.
        #[arg(long)]
        threads: Option<usize>,
        /// Override the per-trial CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Override the summary JSON path.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Solve the LP relaxation of an instance file.
    Solve {
        instance: PathBuf,
        /// Also enumerate the binary optimum (n ≤ 25).
        #[arg(long)]
        exact: bool,
    },
    /// SOA under both schedules against the LP on every problem of a multi-knapsack file.
    Bench {
        file: PathBuf,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Generate an instance from a TOML spec file or an inline `key=value,...` spec.
    Gen {
        spec: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

enum Failure {
    Input(Error),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) => Failure::Runtime(e.to_string()),
            other => Failure::Input(other),
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn std::io::Write) -> std::result::Result<(), Failure> {
    let w = |r: std::io::Result<()>| r.map_err(|e| Failure::Runtime(format!("write failed: {e}")));
    match cmd {
        Command::Run {
            config,
            threads,
            csv,
            summary,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let threads = cfg.resolve_parallelism(threads);
            let report = run_experiment(&cfg, threads).map_err(|e| Failure::Runtime(e.to_string()))?;
            let csv = csv.or_else(|| cfg.output.csv.clone());
            let summary = summary.or_else(|| cfg.output.summary.clone());
            report
                .write(csv.as_deref(), summary.as_deref())
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            for a in &report.aggregates {
                w(writeln!(
                    out,
                    "{:<22} n={:<7} regret={:.4} (±{:.4}) violation={:.4} (±{:.4})",
                    a.algorithm, a.n, a.regret.mean, a.regret.stderr, a.violation.mean, a.violation.stderr
                ))?;
            }
            for (alg, fit) in &report.regret_fits {
                if let Some(f) = &fit.fit {
                    w(writeln!(out, "{alg}: regret exponent {:.3} (r² {:.3})", f.exponent, f.r_squared))?;
                }
            }
            if let Some(p) = &csv {
                w(writeln!(out, "wrote {}", p.display()))?;
            }
            if let Some(p) = &summary {
                w(writeln!(out, "wrote {}", p.display()))?;
            }
            if !report.failures.is_empty() {
                return Err(Failure::Runtime(format!(
                    "{} trial(s) failed; see the summary",
                    report.failures.len()
                )));
            }
            Ok(())
        }
        Command::Solve { instance, exact } => {
            let inst = Instance::read_text(&instance)?;
            let sol = solve_relaxation(&inst)?;
            w(writeln!(out, "status: {:?}", sol.status))?;
            w(writeln!(out, "objective: {}", sol.objective))?;
            w(writeln!(out, "duals: {}", join(&sol.duals)))?;
            w(writeln!(out, "primal: {}", join(&sol.primal)))?;
            if exact {
                if inst.n() > ENUMERATION_LIMIT {
                    return Err(Failure::Input(Error::EnumerationBudget {
                        n: inst.n(),
                        limit: ENUMERATION_LIMIT,
                    }));
                }
                let best = solve_binary_exact(&inst)?;
                w(writeln!(out, "binary objective: {}", best.objective))?;
                let x: Vec<String> = best.x.iter().map(|v| v.to_string()).collect();
                w(writeln!(out, "binary x: {}", x.join(" ")))?;
            }
            Ok(())
        }
        Command::Bench { file, json } => {
            let rows = run_bench(&file, &Default::default())?;
            if json {
                let s = serde_json::to_string_pretty(&rows).map_err(Error::from)?;
                w(writeln!(out, "{s}"))
            } else {
                w(write!(out, "{}", format_bench(&rows)))
            }
        }
        Command::Gen { spec, output } => {
            let spec = parse_gen_spec(&spec)?;
            let inst = generate(&spec)?;
            inst.write_text(&output).map_err(|e| Failure::Runtime(e.to_string()))?;
            w(writeln!(out, "wrote {} ({} × {})", output.display(), inst.m(), inst.n()))
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// A spec is either a path to a TOML file or inline `key=value` pairs
/// separated by commas, e.g. `family=uniform,n=100,m=5,seed=7`. Inline
/// `d_range` takes `lo:hi`.
pub fn parse_gen_spec(text: &str) -> Result<GeneratorSpec> {
    let toml_text = if Path::new(text).is_file() {
        std::fs::read_to_string(text).map_err(|e| Error::io(text, e))?
    } else if text.contains('=') {
        let mut lines = Vec::new();
        for pair in text.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {pair:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let value = if let Some((lo, hi)) = v.split_once(':') {
                format!("[{lo}, {hi}]")
            } else if v.parse::<f64>().is_ok() || v == "true" || v == "false" {
                v.to_string()
            } else {
                format!("{v:?}")
            };
            lines.push(format!("{k} = {value}"));
        }
        lines.join("\n")
    } else {
        return Err(Error::Config(format!(
            "{text:?} is neither a spec file nor inline key=value pairs"
        )));
    };
    let spec: GeneratorSpec =
        toml::from_str(&toml_text).map_err(|e| Error::Config(format!("generator spec: {e}")))?;
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Family;

    #[test]
    fn inline_specs() {
        let s = parse_gen_spec("family=uniform,n=12,m=3,seed=9").unwrap();
        assert_eq!((s.n, s.m, s.seed), (12, 3, 9));
        assert_eq!(s.family, Family::Uniform);
        let s = parse_gen_spec("family=trunc_cauchy,threshold=5,n=8,m=2,d_range=0.2:0.4").unwrap();
        assert_eq!(s.family, Family::TruncCauchy { threshold: 5.0 });
        assert_eq!(s.d_range, (0.2, 0.4));
        assert!(parse_gen_spec("family=nope,n=3,m=1").is_err());
        assert!(parse_gen_spec("garbage").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(cli_main(["onlinelp", "--help"]), 0);
        assert_eq!(cli_main(["onlinelp", "frobnicate"]), 1);
        assert_eq!(cli_main(["onlinelp", "solve", "/no/such/file.txt"]), 1);
    }
}
