use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::check_binary;
use crate::instance::Instance;
use crate::trace::RunTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairConfig {
    pub enabled: bool,
    /// Replaces `min_i d_i` in the removal-count formula. Must be positive.
    pub d_lo_override: Option<f64>,
    /// Leave already-feasible traces untouched. Off by default: the removal
    /// rule clamps the scaled violation to at least 1 and removes columns
    /// even when nothing is violated.
    pub skip_if_feasible: bool,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            enabled: true,
            d_lo_override: None,
            skip_if_feasible: false,
        }
    }
}

/// Size of the removal set:
/// `min(⌊2·v·n₊·ln n / (d̲·√n)⌋ + 1, n₊)` with
/// `v = max(1, max_i (Σ_t a_it x_t − b_i)⁺ / (√n · ln n))`.
pub fn repair_removal_count(n: usize, accepted: usize, max_overflow: f64, d_lo: f64) -> usize {
    if accepted == 0 {
        return 0;
    }
    let nf = n as f64;
    let (sqrt_n, log_n) = (nf.sqrt(), nf.ln());
    let v = (max_overflow / (sqrt_n * log_n)).max(1.0);
    let raw = (2.0 * v * accepted as f64 * log_n / (d_lo * sqrt_n)).floor();
    // `raw` may exceed usize range only when the min below discards it anyway.
    if raw >= accepted as f64 {
        accepted
    } else {
        (raw as usize + 1).min(accepted)
    }
}

/// Zeroes a uniformly drawn subset of the accepted columns, sized by the
/// largest overspend, so that the result is feasible with high probability.
pub fn repair_feasibility(
    inst: &Instance,
    trace: &RunTrace,
    cfg: &RepairConfig,
    rng_seed: u64,
) -> Result<RunTrace> {
    let n = inst.n();
    check_binary(n, &trace.decisions)?;
    if !cfg.enabled {
        return Ok(trace.clone());
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "feasibility repair needs n ≥ 3 (got {n})"
        )));
    }
    let d_lo = match cfg.d_lo_override {
        Some(d) if d > 0.0 => d,
        Some(d) => {
            return Err(Error::InvalidArgument(format!(
                "d_lo override must be positive, got {d}"
            )))
        }
        None => inst.stats().d_lo,
    };
    let accepted: Vec<usize> = trace
        .decisions
        .iter()
        .enumerate()
        .filter(|(_, &x)| x == 1)
        .map(|(t, _)| t)
        .collect();
    if accepted.is_empty() {
        return Ok(trace.clone());
    }
    let used = inst.consumption(&trace.decisions)?;
    let max_overflow = used
        .iter()
        .zip(inst.capacity())
        .map(|(u, b)| (u - b).max(0.0))
        .fold(0.0, f64::max);
    if cfg.skip_if_feasible && max_overflow == 0.0 {
        return Ok(trace.clone());
    }
    let count = repair_removal_count(n, accepted.len(), max_overflow, d_lo);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut repaired = trace.clone();
    for k in rand::seq::index::sample(&mut rng, accepted.len(), count) {
        repaired.decisions[accepted[k]] = 0;
    }
    repaired.recompute(inst)?;
    repaired.rng_seed = rng_seed;
    Ok(repaired)
}

/// Zeroes every decision from the first arrival whose acceptance would
/// overspend some capacity onwards, i.e. the algorithm stops once a
/// constraint is exhausted.
pub fn truncate_at_exhaustion(inst: &Instance, trace: &RunTrace) -> Result<RunTrace> {
    check_binary(inst.n(), &trace.decisions)?;
    let mut used = vec![0.0; inst.m()];
    let mut out = trace.clone();
    let mut stopped = false;
    for (t, x) in out.decisions.iter_mut().enumerate() {
        if stopped {
            *x = 0;
            continue;
        }
        if *x == 1 {
            let a = inst.column(t);
            let fits = used
                .iter()
                .zip(a)
                .zip(inst.capacity())
                .all(|((u, a), b)| u + a <= *b);
            if fits {
                for (u, a) in used.iter_mut().zip(a) {
                    *u += a;
                }
            } else {
                *x = 0;
                stopped = true;
            }
        }
    }
    out.recompute(inst)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removal_count_formula() {
        // 2·10·ln(100)/(0.5·10) = 18.42…, floor 18, plus one = 19, capped at n₊ = 10
        assert_eq!(repair_removal_count(100, 10, 0.0, 0.5), 10);
        // Large n with few acceptances relative to √n.
        let n = 10_000;
        let expected = (2.0 * 50.0 * (n as f64).ln() / (0.5 * 100.0)).floor() as usize + 1;
        assert_eq!(expected, 19);
        assert_eq!(repair_removal_count(n, 50, 0.0, 0.5), 19);
        assert_eq!(repair_removal_count(n, 0, 5.0, 0.5), 0);
    }

    #[test]
    fn empty_selection_unchanged() {
        let inst = Instance::new(vec![1.0; 4], vec![1.0; 4], vec![2.0]).unwrap();
        let tr = RunTrace::from_decisions(&inst, vec![0; 4], 0);
        let out = repair_feasibility(&inst, &tr, &RepairConfig::default(), 5).unwrap();
        assert_eq!(out, tr);
    }

    #[test]
    fn repair_zeroes_only_accepted() {
        let inst = Instance::new(vec![1.0; 100], vec![1.0; 100], vec![50.0]).unwrap();
        let tr = RunTrace::from_decisions(&inst, vec![1; 100], 0);
        let out = repair_feasibility(&inst, &tr, &RepairConfig::default(), 5).unwrap();
        let removed = tr
            .decisions
            .iter()
            .zip(&out.decisions)
            .filter(|(a, b)| a != b)
            .count();
        let overflow = 50.0;
        assert_eq!(removed, repair_removal_count(100, 100, overflow, 0.5));
        out.check_consistency(&inst).unwrap();
    }

    #[test]
    fn bypass_flag_skips_feasible_traces() {
        let inst = Instance::new(vec![1.0; 10], vec![1.0; 10], vec![5.0]).unwrap();
        let tr = RunTrace::from_decisions(&inst, vec![1, 1, 0, 0, 0, 0, 0, 0, 0, 0], 0);
        let cfg = RepairConfig {
            skip_if_feasible: true,
            ..RepairConfig::default()
        };
        assert_eq!(repair_feasibility(&inst, &tr, &cfg, 1).unwrap(), tr);
        let out = repair_feasibility(&inst, &tr, &RepairConfig::default(), 1).unwrap();
        assert!(out.accepted() < 2);
    }

    #[test]
    fn rejects_tiny_n_and_bad_override() {
        let inst = Instance::new(vec![1.0; 2], vec![1.0; 2], vec![1.0]).unwrap();
        let tr = RunTrace::from_decisions(&inst, vec![1, 1], 0);
        assert!(repair_feasibility(&inst, &tr, &RepairConfig::default(), 0).is_err());
        let inst = Instance::new(vec![1.0; 3], vec![1.0; 3], vec![1.0]).unwrap();
        let tr = RunTrace::from_decisions(&inst, vec![1, 1, 1], 0);
        let cfg = RepairConfig {
            d_lo_override: Some(0.0),
            ..RepairConfig::default()
        };
        assert!(repair_feasibility(&inst, &tr, &cfg, 0).is_err());
    }

    #[test]
    fn truncation_stops_at_first_overflow() {
        let inst = Instance::new(vec![1.0; 4], vec![1.0, 1.0, 1.0, 0.0], vec![2.0]).unwrap();
        let tr = RunTrace::from_decisions(&inst, vec![1, 1, 1, 1], 0);
        let out = truncate_at_exhaustion(&inst, &tr).unwrap();
        assert_eq!(out.decisions, vec![1, 1, 0, 0]);
        assert_eq!(out.objective, 2.0);
    }
}
