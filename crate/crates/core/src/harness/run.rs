use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::algorithms::{self, repair_feasibility};
use crate::error::{Error, Result};
use crate::generators::{generate, permute, GeneratorSpec, PermutationPlan};
use crate::instance::Instance;
use crate::metrics::{aggregate, evaluate_trial, fit_scaling, TrialResult};
use crate::mknap::read_mknap;
use crate::simplex::{solve_relaxation_with, LpStatus};

use super::config::{ExperimentConfig, Source};
use super::report::{Environment, ExperimentReport, FitOutcome, TrialFailure, FORMAT_VERSION};
use super::seed::derive_seed;

/// One instance to build: either a generator size or a loaded benchmark problem.
#[derive(Clone, Copy)]
struct Unit {
    n: usize,
    trial: usize,
    problem: Option<usize>,
}

type UnitOutcome = (Vec<TrialResult>, Vec<TrialFailure>);

fn build_instance(
    cfg: &ExperimentConfig,
    problems: &[Instance],
    unit: Unit,
) -> Result<Instance> {
    let (inst, permute_on) = match (&cfg.source, unit.problem) {
        (Source::Generator { family, d_range, permute }, _) => {
            let spec = GeneratorSpec {
                family: *family,
                n: unit.n,
                m: cfg.m,
                d_range: *d_range,
                seed: derive_seed(cfg.root_seed, unit.n, unit.trial, "instance"),
            };
            (generate(&spec)?, *permute)
        }
        (Source::Mknap { permute, .. }, Some(p)) => (problems[p].clone(), *permute),
        (Source::Mknap { .. }, None) => unreachable!("benchmark units carry a problem index"),
    };
    if !permute_on {
        return Ok(inst);
    }
    let plan = PermutationPlan::random(
        inst.n(),
        derive_seed(cfg.root_seed, unit.n, unit.trial, "permutation"),
    );
    permute(&inst, &plan)
}

fn run_unit(cfg: &ExperimentConfig, problems: &[Instance], unit: Unit) -> UnitOutcome {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let fail_all = |failures: &mut Vec<TrialFailure>, message: String| {
        for spec in &cfg.algorithms {
            failures.push(TrialFailure {
                algorithm: spec.label(),
                n: unit.n,
                trial: unit.trial,
                message: message.clone(),
            });
        }
    };
    let inst = match build_instance(cfg, problems, unit) {
        Ok(i) => i,
        Err(e) => {
            fail_all(&mut failures, format!("instance: {e}"));
            return (rows, failures);
        }
    };
    let lp_opt = match solve_relaxation_with(&inst, &cfg.tolerances) {
        Ok(sol) if sol.status == LpStatus::Optimal => sol.objective,
        Ok(sol) => {
            fail_all(&mut failures, format!("offline LP: {:?}", sol.status));
            return (rows, failures);
        }
        Err(e) => {
            fail_all(&mut failures, format!("offline LP: {e}"));
            return (rows, failures);
        }
    };
    for spec in &cfg.algorithms {
        let label = spec.label();
        let seed = derive_seed(cfg.root_seed, unit.n, unit.trial, &label);
        let outcome = (|| -> Result<()> {
            let alg = spec.to_config(seed)?;
            let start = Instant::now();
            let trace = algorithms::run(&inst, &alg, &cfg.tolerances)?;
            let elapsed = start.elapsed().as_secs_f64();
            let mut row = evaluate_trial(&inst, &trace, Some(lp_opt))?;
            row.algorithm = label.clone();
            row.n = unit.n;
            row.trial = unit.trial;
            row.seed = seed;
            row.wall_time = elapsed;
            rows.push(row);
            if cfg.repair.enabled {
                let repair_label = format!("{label}+repair");
                let repair_seed = derive_seed(cfg.root_seed, unit.n, unit.trial, &repair_label);
                let start = Instant::now();
                let fixed = repair_feasibility(&inst, &trace, &cfg.repair, repair_seed)?;
                let extra = start.elapsed().as_secs_f64();
                let mut row = evaluate_trial(&inst, &fixed, Some(lp_opt))?;
                row.algorithm = repair_label;
                row.n = unit.n;
                row.trial = unit.trial;
                row.seed = repair_seed;
                row.max_dual_norm = trace.max_dual_norm;
                row.wall_time = elapsed + extra;
                rows.push(row);
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            failures.push(TrialFailure {
                algorithm: label,
                n: unit.n,
                trial: unit.trial,
                message: e.to_string(),
            });
        }
    }
    (rows, failures)
}

/// Runs every `(n, trial)` unit of the experiment on a pool of `threads`
/// workers. Per-trial failures are recorded and the run continues; config
/// problems abort before any work.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let threads = threads.max(1);
    let (units, problems) = match &cfg.source {
        Source::Generator { .. } => {
            let units = cfg
                .n
                .iter()
                .flat_map(|&n| (0..cfg.trials).map(move |trial| Unit { n, trial, problem: None }))
                .collect::<Vec<_>>();
            (units, Vec::new())
        }
        Source::Mknap { path, .. } => {
            let problems: Vec<Instance> = read_mknap(path)?.into_iter().map(|p| p.instance).collect();
            // Problems of equal size share an `n` key, so their trial indices are offset.
            let mut next_trial: BTreeMap<usize, usize> = BTreeMap::new();
            let mut units = Vec::new();
            for (p, inst) in problems.iter().enumerate() {
                let base = next_trial.entry(inst.n()).or_insert(0);
                for t in 0..cfg.trials {
                    units.push(Unit {
                        n: inst.n(),
                        trial: *base + t,
                        problem: Some(p),
                    });
                }
                *base += cfg.trials;
            }
            (units, problems)
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} workers: {e}")))?;
    let outcomes: Vec<UnitOutcome> =
        pool.install(|| units.par_iter().map(|&u| run_unit(cfg, &problems, u)).collect());

    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for (rows, fails) in outcomes {
        trials.extend(rows);
        failures.extend(fails);
    }
    trials.sort_by(|a, b| (a.n, a.trial, &a.algorithm).cmp(&(b.n, b.trial, &b.algorithm)));
    failures.sort_by(|a, b| (a.n, a.trial, &a.algorithm).cmp(&(b.n, b.trial, &b.algorithm)));
    for f in &failures {
        log::warn!("{} n={} trial={}: {}", f.algorithm, f.n, f.trial, f.message);
    }

    let mut groups: BTreeMap<(String, usize, usize), Vec<TrialResult>> = BTreeMap::new();
    for t in &trials {
        groups
            .entry((t.algorithm.clone(), t.n, t.m))
            .or_default()
            .push(t.clone());
    }
    let aggregates = groups
        .values()
        .map(|g| aggregate(g))
        .collect::<Result<Vec<_>>>()?;

    let mut regret_fits = BTreeMap::new();
    let mut violation_fits = BTreeMap::new();
    let mut by_alg: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for a in &aggregates {
        by_alg.entry(a.algorithm.as_str()).or_default().push(a);
    }
    for (alg, aggs) in by_alg {
        let regret: Vec<_> = aggs.iter().map(|a| (a.n, a.regret.mean, a.regret.stderr)).collect();
        let violation: Vec<_> = aggs
            .iter()
            .map(|a| (a.n, a.violation.mean, a.violation.stderr))
            .collect();
        regret_fits.insert(alg.to_string(), FitOutcome::from_result(fit_scaling(&regret)));
        violation_fits.insert(alg.to_string(), FitOutcome::from_result(fit_scaling(&violation)));
    }

    let mut notes = BTreeMap::new();
    notes.insert(
        "regret_reference".into(),
        "regret and competitiveness use the LP relaxation optimum".into(),
    );
    notes.insert(
        "seed_derivation".into(),
        "splitmix64 chain over (root_seed, n, trial, fnv1a(tag))".into(),
    );
    notes.insert(
        "wall_time".into(),
        "algorithm time only, excluding generation and the offline LP".into(),
    );
    if matches!(cfg.source, Source::Generator { family: crate::generators::Family::TruncCauchy { .. }, .. }) {
        notes.insert(
            "cauchy_truncation".into(),
            "rejection sampling: redraw until |a| <= threshold".into(),
        );
    }
    let environment = Environment {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        os: std::env::consts::OS.to_string(),
        arch: std::env::consts::ARCH.to_string(),
        threads,
        root_seed: cfg.root_seed,
        total_algorithm_seconds: trials.iter().map(|t| t.wall_time).sum(),
        notes,
    };

    Ok(ExperimentReport {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        trials,
        aggregates,
        regret_fits,
        violation_fits,
        failures,
        environment,
    })
}
