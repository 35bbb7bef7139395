//! Regret, violation and competitiveness over seeded trials.
//!
//! Regret is always measured against the LP relaxation optimum `R_n*`,
//! which upper-bounds the integer optimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{violation_norm, Instance};
use crate::simplex::{solve_relaxation, LpStatus};
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub objective: f64,
    pub offline_lp_opt: f64,
    pub regret: f64,
    pub violation: f64,
    /// `objective / offline_lp_opt`; `None` when the LP optimum is not positive.
    pub competitiveness: Option<f64>,
    pub capacity_norm: f64,
    pub max_dual_norm: f64,
    pub wall_time: f64,
}

impl TrialResult {
    pub fn normalized_regret(&self) -> Option<f64> {
        (self.offline_lp_opt > 0.0).then(|| self.regret / self.offline_lp_opt)
    }

    pub fn normalized_violation(&self) -> f64 {
        self.violation / self.capacity_norm
    }
}

/// Scores a binary trace. When `lp_opt` is `None` the relaxation is solved here.
pub fn evaluate_trial(inst: &Instance, trace: &RunTrace, lp_opt: Option<f64>) -> Result<TrialResult> {
    let offline_lp_opt = match lp_opt {
        Some(v) => v,
        None => {
            let sol = solve_relaxation(inst)?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::Solver(format!(
                    "offline LP returned {:?}",
                    sol.status
                )));
            }
            sol.objective
        }
    };
    let objective = inst.objective(&trace.decisions)?;
    let violation = violation_norm(inst, &trace.decisions)?;
    Ok(TrialResult {
        algorithm: String::new(),
        n: inst.n(),
        m: inst.m(),
        trial: 0,
        seed: trace.rng_seed,
        objective,
        offline_lp_opt,
        regret: offline_lp_opt - objective,
        violation,
        competitiveness: (offline_lp_opt > 0.0).then(|| objective / offline_lp_opt),
        capacity_norm: inst.capacity_norm(),
        max_dual_norm: trace.max_dual_norm,
        wall_time: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation over `√count`; 0 for a single value.
    pub stderr: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        let count = values.len();
        if count == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat {
            mean,
            stderr,
            count,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub objective: Stat,
    pub regret: Stat,
    pub violation: Stat,
    /// Regret divided by `R_n*`, over trials with a positive LP optimum.
    pub normalized_regret: Option<Stat>,
    /// Violation divided by `‖b‖₂`.
    pub normalized_violation: Stat,
    pub competitiveness: Option<Stat>,
    pub max_dual_norm: Stat,
    pub wall_time: Stat,
    /// Trials whose LP optimum was not positive (no competitiveness).
    pub nonpositive_opt_trials: usize,
}

/// Means and standard errors over one `(algorithm, n, m)` group. The
/// reduction runs in `(trial, seed)` order, so shuffling the input does not
/// change a single bit of the output.
pub fn aggregate(results: &[TrialResult]) -> Result<Aggregate> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot aggregate an empty result list".into()))?;
    if let Some(odd) = results
        .iter()
        .find(|r| r.algorithm != first.algorithm || r.n != first.n || r.m != first.m)
    {
        return Err(Error::InvalidArgument(format!(
            "mixed groups: ({}, {}, {}) vs ({}, {}, {})",
            first.algorithm, first.n, first.m, odd.algorithm, odd.n, odd.m
        )));
    }
    let mut sorted: Vec<&TrialResult> = results.iter().collect();
    sorted.sort_by(|a, b| {
        (a.trial, a.seed)
            .cmp(&(b.trial, b.seed))
            .then(a.objective.total_cmp(&b.objective))
    });
    let collect = |f: &dyn Fn(&TrialResult) -> f64| sorted.iter().map(|r| f(r)).collect::<Vec<_>>();
    let collect_opt = |f: &dyn Fn(&TrialResult) -> Option<f64>| {
        sorted.iter().filter_map(|r| f(r)).collect::<Vec<_>>()
    };
    let stat = |v: Vec<f64>| Stat::of(&v).expect("non-empty");
    Ok(Aggregate {
        algorithm: first.algorithm.clone(),
        n: first.n,
        m: first.m,
        trials: results.len(),
        objective: stat(collect(&|r| r.objective)),
        regret: stat(collect(&|r| r.regret)),
        violation: stat(collect(&|r| r.violation)),
        normalized_regret: Stat::of(&collect_opt(&|r| r.normalized_regret())),
        normalized_violation: stat(collect(&|r| r.normalized_violation())),
        competitiveness: Stat::of(&collect_opt(&|r| r.competitiveness)),
        max_dual_norm: stat(collect(&|r| r.max_dual_norm)),
        wall_time: stat(collect(&|r| r.wall_time)),
        nonpositive_opt_trials: results.iter().filter(|r| r.offline_lp_opt <= 0.0).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    /// False when the mean was not positive and was left out of the fit.
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Slope of `log(mean)` against `log(n)`.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<ScalingPoint>,
}

impl ScalingFit {
    pub fn excluded(&self) -> impl Iterator<Item = &ScalingPoint> {
        self.points.iter().filter(|p| !p.used)
    }
}

/// Ordinary least squares in log–log space over `(n, mean, stderr)` points.
/// Non-positive means are excluded and flagged; at least three distinct `n`
/// spanning a factor of ten must remain.
pub fn fit_scaling(points: &[(usize, f64, f64)]) -> Result<ScalingFit> {
    let points: Vec<ScalingPoint> = points
        .iter()
        .map(|&(n, mean, stderr)| ScalingPoint {
            n,
            mean,
            stderr,
            used: mean > 0.0 && mean.is_finite() && n > 0,
        })
        .collect();
    let used: Vec<&ScalingPoint> = points.iter().filter(|p| p.used).collect();
    let mut distinct: Vec<usize> = used.iter().map(|p| p.n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs ≥ 3 distinct n with positive means, got {}",
            distinct.len()
        )));
    }
    let (lo, hi) = (distinct[0] as f64, *distinct.last().unwrap() as f64);
    if hi / lo < 10.0 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs n spanning a decade, got {lo}..{hi}"
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.mean.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn result(trial: usize, regret: f64) -> TrialResult {
        TrialResult {
            algorithm: "soa[sqrt_n]".into(),
            n: 10,
            m: 1,
            trial,
            seed: trial as u64,
            objective: 10.0 - regret,
            offline_lp_opt: 10.0,
            regret,
            violation: 0.0,
            competitiveness: Some((10.0 - regret) / 10.0),
            capacity_norm: 2.0,
            max_dual_norm: 0.0,
            wall_time: 0.0,
        }
    }

    #[test]
    fn single_result_has_zero_stderr() {
        let agg = aggregate(&[result(0, 2.5)]).unwrap();
        assert_eq!(agg.regret.mean, 2.5);
        assert_eq!(agg.regret.stderr, 0.0);
        assert_eq!(agg.normalized_regret.unwrap().mean, 0.25);
    }

    #[test]
    fn symmetric_results_average_to_zero() {
        let agg = aggregate(&[result(0, 1.5), result(1, -1.5)]).unwrap();
        assert_eq!(agg.regret.mean, 0.0);
        assert_abs_diff_eq!(agg.regret.stderr, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_errors() {
        assert!(aggregate(&[]).is_err());
        let mut other = result(1, 1.0);
        other.n = 20;
        assert!(aggregate(&[result(0, 1.0), other]).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let sqrt: Vec<_> = [10usize, 100, 1000, 10000]
            .iter()
            .map(|&n| (n, 3.0 * (n as f64).sqrt(), 0.0))
            .collect();
        let fit = fit_scaling(&sqrt).unwrap();
        assert_abs_diff_eq!(fit.exponent, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        let lin: Vec<_> = [10usize, 100, 1000].iter().map(|&n| (n, 0.7 * n as f64, 0.0)).collect();
        assert_abs_diff_eq!(fit_scaling(&lin).unwrap().exponent, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn nonpositive_means_are_flagged() {
        let pts = vec![(10, 1.0, 0.0), (100, -2.0, 0.0), (1000, 10.0, 0.0), (10000, 100.0, 0.0)];
        let fit = fit_scaling(&pts).unwrap();
        assert_eq!(fit.excluded().count(), 1);
        // log10 coordinates (1,0), (3,1), (4,2): slope 9/14
        assert_abs_diff_eq!(fit.exponent, 9.0 / 14.0, epsilon = 1e-12);
        let few = vec![(10, 1.0, 0.0), (100, -2.0, 0.0), (1000, 10.0, 0.0)];
        assert!(fit_scaling(&few).is_err());
        let narrow = vec![(10, 1.0, 0.0), (12, 2.0, 0.0), (14, 3.0, 0.0)];
        assert!(fit_scaling(&narrow).is_err());
    }
}
