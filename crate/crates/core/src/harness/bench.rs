//! Benchmark protocol for multi-knapsack files: SOA under both step
//! schedules, stopped as soon as any capacity would be exceeded, scored
//! against the offline LP relaxation.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algorithms::{run_soa, truncate_at_exhaustion, AlgorithmConfig};
use crate::dual::StepSchedule;
use crate::error::{Error, Result};
use crate::instance::violation_norm;
use crate::mknap::{read_mknap, MknapProblem};
use crate::simplex::{solve_relaxation_with, LpStatus, SimplexOptions};

pub const BENCH_SCHEDULES: [StepSchedule; 2] = [StepSchedule::OneOverSqrtT, StepSchedule::OneOverSqrtN];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub schedule: StepSchedule,
    pub objective: f64,
    /// `objective / lp_opt`.
    pub competitiveness: f64,
    pub seconds: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: usize,
    pub n: usize,
    pub m: usize,
    pub lp_opt: f64,
    pub lp_seconds: f64,
    pub known_optimum: Option<f64>,
    pub entries: Vec<BenchEntry>,
}

pub fn bench_problem(index: usize, problem: &MknapProblem, opts: &SimplexOptions) -> Result<BenchRow> {
    let inst = &problem.instance;
    let start = Instant::now();
    let lp = solve_relaxation_with(inst, opts)?;
    let lp_seconds = start.elapsed().as_secs_f64();
    if lp.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("problem {}: offline LP {:?}", index + 1, lp.status)));
    }
    let mut entries = Vec::new();
    for schedule in BENCH_SCHEDULES {
        let cfg = AlgorithmConfig::soa(schedule);
        let start = Instant::now();
        let trace = truncate_at_exhaustion(inst, &run_soa(inst, &cfg)?)?;
        let seconds = start.elapsed().as_secs_f64();
        entries.push(BenchEntry {
            schedule,
            objective: trace.objective,
            competitiveness: trace.objective / lp.objective,
            seconds,
            violation: violation_norm(inst, &trace.decisions)?,
        });
    }
    Ok(BenchRow {
        problem: index + 1,
        n: inst.n(),
        m: inst.m(),
        lp_opt: lp.objective,
        lp_seconds,
        known_optimum: problem.known_optimum,
        entries,
    })
}

pub fn run_bench(path: &Path, opts: &SimplexOptions) -> Result<Vec<BenchRow>> {
    read_mknap(path)?
        .iter()
        .enumerate()
        .map(|(i, p)| bench_problem(i, p, opts))
        .collect()
}

pub fn format_bench(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>4} {:>6} {:>4} {:>14} {:>10}", "#", "n", "m", "lp_opt", "lp_time");
    for s in BENCH_SCHEDULES {
        let _ = write!(out, " {:>12} {:>10}", format!("comp[{s}]"), format!("t[{s}]"));
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{:>4} {:>6} {:>4} {:>14.4} {:>10.6}",
            r.problem, r.n, r.m, r.lp_opt, r.lp_seconds
        );
        for e in &r.entries {
            let _ = write!(out, " {:>12.4} {:>10.6}", e.competitiveness, e.seconds);
        }
        out.push('\n');
    }
    out
}
