//! Baselines that re-solve the scaled prefix LP at every step.
//!
//! Each LP is solved from scratch; their cost relative to the one-pass
//! algorithms is part of what the experiments report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{threshold_decision, Instance};
use crate::simplex::{solve_scaled_with, LpSolution, LpStatus, SimplexOptions};
use crate::trace::RunTrace;

fn prefix_lp(inst: &Instance, t: usize, opts: &SimplexOptions) -> Result<LpSolution> {
    let sol = solve_scaled_with(inst, t, &vec![0.0; inst.m()], opts)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "scaled LP over the first {t} columns returned {:?}",
            sol.status
        )));
    }
    Ok(sol)
}

pub fn run_dla(inst: &Instance) -> Result<RunTrace> {
    run_dla_with(inst, false, &SimplexOptions::default())
}

/// Thresholds arrival `t+1` with the optimal dual of the scaled LP over the
/// first `t` arrivals (`p_1 = 0`). The LP after the final arrival is not
/// solved since its dual is never used.
pub fn run_dla_with(inst: &Instance, record_history: bool, opts: &SimplexOptions) -> Result<RunTrace> {
    let (n, m) = (inst.n(), inst.m());
    let mut prices = vec![0.0; m];
    let mut history = record_history.then(|| vec![0.0]);
    let mut max_norm = 0.0_f64;
    let mut decisions = Vec::with_capacity(n);
    for t in 1..=n {
        decisions.push(threshold_decision(inst.reward(t - 1), inst.column(t - 1), &prices));
        if t == n {
            break;
        }
        prices = prefix_lp(inst, t, opts)?.duals;
        let norm = prices.iter().map(|p| p * p).sum::<f64>().sqrt();
        max_norm = max_norm.max(norm);
        if let Some(h) = &mut history {
            h.push(norm);
        }
    }
    let mut trace = RunTrace::from_decisions(inst, decisions, 0);
    trace.dual_norm_history = history;
    trace.max_dual_norm = max_norm;
    trace.final_prices = prices;
    Ok(trace)
}

pub fn run_pbd(inst: &Instance, rng_seed: u64) -> Result<RunTrace> {
    run_pbd_with(inst, rng_seed, &SimplexOptions::default())
}

/// Accepts arrival `t` with probability equal to its coordinate in the
/// optimal solution of the scaled LP over the first `t` arrivals. Exactly one
/// uniform draw is consumed per step.
pub fn run_pbd_with(inst: &Instance, rng_seed: u64, opts: &SimplexOptions) -> Result<RunTrace> {
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut decisions = Vec::with_capacity(n);
    for t in 1..=n {
        let fractional = prefix_lp(inst, t, opts)?.primal[t - 1].clamp(0.0, 1.0);
        let u: f64 = rng.random();
        decisions.push(u32::from(u < fractional));
    }
    Ok(RunTrace::from_decisions(inst, decisions, rng_seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dla_negative_rewards() {
        let inst = Instance::from_rows(
            vec![-1.0, -0.5, -2.0],
            &[vec![1.0, 0.5, 0.2]],
            vec![1.0],
        )
        .unwrap();
        let tr = run_dla_with(&inst, true, &SimplexOptions::default()).unwrap();
        assert_eq!(tr.decisions, vec![0, 0, 0]);
        assert!(tr.dual_norm_history.unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pbd_degenerate_bernoulli() {
        // Column 1 fits entirely in its prefix LP (x̃ = 1); column 2 has a negative reward (x̃ = 0).
        let inst = Instance::new(vec![1.0, -1.0], vec![0.1, 0.1], vec![2.0]).unwrap();
        for seed in 0..20 {
            let tr = run_pbd(&inst, seed).unwrap();
            assert_eq!(tr.decisions, vec![1, 0]);
        }
    }

    #[test]
    fn pbd_is_seed_deterministic() {
        let inst = Instance::new(vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0], vec![1.5]).unwrap();
        assert_eq!(run_pbd(&inst, 11).unwrap(), run_pbd(&inst, 11).unwrap());
    }
}
