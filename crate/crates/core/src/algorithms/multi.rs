use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AlgorithmConfig, AlgorithmKind};
use crate::dual::DualState;
use crate::error::Result;
use crate::instance::{dot, MultiInstance};
use crate::trace::RunTrace;

/// Multi-option SOA: at each arrival take the option with the largest
/// surplus `r_tl − a_tlᵀp` if that surplus is positive, breaking exact ties
/// uniformly at random, then take the projected step with `γ = 1/√n`.
///
/// The seeded generator is only consulted when the argmax set has more than
/// one element, so `k = 1` reproduces [`super::run_soa`] exactly.
pub fn run_multi_soa(inst: &MultiInstance, cfg: &AlgorithmConfig) -> Result<RunTrace> {
    let schedule = cfg.expect(AlgorithmKind::MultiSoa)?;
    let (n, m, k) = (inst.n(), inst.m(), inst.k());
    let d = inst.per_column_budget();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut dual = DualState::new(m, n, schedule);
    let mut history = cfg.record_dual_history.then(|| vec![0.0]);
    let mut decisions = Vec::with_capacity(n);
    let mut objective = 0.0;
    let mut consumption = vec![0.0; m];
    let mut surplus = vec![0.0; k];
    let mut ties = Vec::with_capacity(k);
    for t in 0..n {
        let mut best = f64::NEG_INFINITY;
        for (l, s) in surplus.iter_mut().enumerate() {
            *s = inst.reward(t, l) - dot(inst.column(t, l), dual.prices());
            best = best.max(*s);
        }
        if best > 0.0 {
            ties.clear();
            ties.extend((0..k).filter(|&l| surplus[l] == best));
            let choice = if ties.len() == 1 {
                ties[0]
            } else {
                ties[rng.random_range(0..ties.len())]
            };
            let a = inst.column(t, choice);
            decisions.push(choice as u32 + 1);
            objective += inst.reward(t, choice);
            for (u, a) in consumption.iter_mut().zip(a) {
                *u += a;
            }
            dual.step(Some(a), d);
        } else {
            decisions.push(0);
            dual.step(None, d);
        }
        if let Some(h) = &mut history {
            h.push(dual.norm());
        }
    }
    Ok(RunTrace {
        decisions,
        objective,
        consumption,
        dual_norm_history: history,
        max_dual_norm: dual.max_norm_seen(),
        final_prices: dual.prices().to_vec(),
        tentative: None,
        rng_seed: cfg.rng_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_options_unprofitable_rejects() {
        // p_1 = 0 and every reward ≤ 0
        let mi = MultiInstance::new(2, vec![0.0, -1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        let tr = run_multi_soa(&mi, &AlgorithmConfig::multi_soa(1)).unwrap();
        assert_eq!(tr.decisions, vec![0]);
        assert_eq!(tr.final_prices, vec![0.0]);
    }

    #[test]
    fn picks_largest_surplus() {
        let mi = MultiInstance::new(3, vec![1.0, 3.0, 2.0], vec![1.0, 1.0, 1.0], vec![1.0]).unwrap();
        let tr = run_multi_soa(&mi, &AlgorithmConfig::multi_soa(1)).unwrap();
        assert_eq!(tr.decisions, vec![2]);
        assert_eq!(tr.objective, 3.0);
        tr.check_consistency_multi(&mi).unwrap();
    }
}
