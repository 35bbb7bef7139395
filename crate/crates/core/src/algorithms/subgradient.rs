use super::{AlgorithmConfig, AlgorithmKind};
use crate::dual::DualState;
use crate::error::Result;
use crate::instance::{threshold_decision, Instance};
use crate::trace::RunTrace;

struct Recorder {
    history: Option<Vec<f64>>,
}

impl Recorder {
    fn new(enabled: bool, n: usize, dual: &DualState) -> Self {
        let history = enabled.then(|| {
            let mut h = Vec::with_capacity(n + 1);
            h.push(dual.norm());
            h
        });
        Recorder { history }
    }

    fn push(&mut self, dual: &DualState) {
        if let Some(h) = &mut self.history {
            h.push(dual.norm());
        }
    }
}

struct Accumulator {
    decisions: Vec<u32>,
    objective: f64,
    consumption: Vec<f64>,
}

impl Accumulator {
    fn new(n: usize, m: usize) -> Self {
        Accumulator {
            decisions: Vec::with_capacity(n),
            objective: 0.0,
            consumption: vec![0.0; m],
        }
    }

    fn take(&mut self, reward: f64, column: &[f64]) {
        self.decisions.push(1);
        self.objective += reward;
        for (u, a) in self.consumption.iter_mut().zip(column) {
            *u += a;
        }
    }

    fn skip(&mut self) {
        self.decisions.push(0);
    }

    fn finish(self, dual: &DualState, rec: Recorder, seed: u64) -> RunTrace {
        RunTrace {
            decisions: self.decisions,
            objective: self.objective,
            consumption: self.consumption,
            dual_norm_history: rec.history,
            max_dual_norm: dual.max_norm_seen(),
            final_prices: dual.prices().to_vec(),
            tentative: None,
            rng_seed: seed,
        }
    }
}

/// One pass of thresholding against the current prices, followed by the
/// projected step `p ← max(p + γ_t(a_t x_t − d), 0)`. No feasibility is
/// enforced.
pub fn run_soa(inst: &Instance, cfg: &AlgorithmConfig) -> Result<RunTrace> {
    let schedule = cfg.expect(AlgorithmKind::Soa)?;
    let (n, m) = (inst.n(), inst.m());
    let d = inst.per_column_budget();
    let mut dual = DualState::new(m, n, schedule);
    let mut rec = Recorder::new(cfg.record_dual_history, n, &dual);
    let mut acc = Accumulator::new(n, m);
    for t in 0..n {
        let (r, a) = (inst.reward(t), inst.column(t));
        if threshold_decision(r, a, dual.prices()) == 1 {
            acc.take(r, a);
            dual.step(Some(a), d);
        } else {
            acc.skip();
            dual.step(None, d);
        }
        rec.push(&dual);
    }
    Ok(acc.finish(&dual, rec, cfg.rng_seed))
}

/// SOA with an acceptance gate. The price update is driven by the tentative
/// decision `x̃_t`; the realized `x_t` is `x̃_t` only when accepting keeps the
/// cumulative consumption within `b` in every row.
pub fn run_sfa(inst: &Instance, cfg: &AlgorithmConfig) -> Result<RunTrace> {
    let schedule = cfg.expect(AlgorithmKind::Sfa)?;
    let (n, m) = (inst.n(), inst.m());
    let d = inst.per_column_budget();
    let b = inst.capacity();
    let mut dual = DualState::new(m, n, schedule);
    let mut rec = Recorder::new(cfg.record_dual_history, n, &dual);
    let mut acc = Accumulator::new(n, m);
    let mut tentative = Vec::with_capacity(n);
    for t in 0..n {
        let (r, a) = (inst.reward(t), inst.column(t));
        let wanted = threshold_decision(r, a, dual.prices());
        tentative.push(wanted);
        if wanted == 1 {
            dual.step(Some(a), d);
            let fits = acc
                .consumption
                .iter()
                .zip(a)
                .zip(b)
                .all(|((u, a), b)| u + a <= *b);
            if fits {
                acc.take(r, a);
            } else {
                acc.skip();
            }
        } else {
            dual.step(None, d);
            acc.skip();
        }
        rec.push(&dual);
    }
    let mut trace = acc.finish(&dual, rec, cfg.rng_seed);
    trace.tentative = Some(tentative);
    Ok(trace)
}

/// SOA whose step pulls towards the remaining-budget rate `b_t/(n−t)`.
/// The update after the final decision would divide by zero and is never
/// used, so it is skipped.
pub fn run_sna(inst: &Instance, cfg: &AlgorithmConfig) -> Result<RunTrace> {
    let schedule = cfg.expect(AlgorithmKind::Sna)?;
    let (n, m) = (inst.n(), inst.m());
    let mut remaining = inst.capacity().to_vec();
    let mut target = vec![0.0; m];
    let mut dual = DualState::new(m, n, schedule);
    let mut rec = Recorder::new(cfg.record_dual_history, n, &dual);
    let mut acc = Accumulator::new(n, m);
    for t in 1..=n {
        let (r, a) = (inst.reward(t - 1), inst.column(t - 1));
        let accept = threshold_decision(r, a, dual.prices()) == 1;
        if accept {
            acc.take(r, a);
            for (rb, a) in remaining.iter_mut().zip(a) {
                *rb -= a;
            }
        } else {
            acc.skip();
        }
        if t == n {
            dual.skip();
            break;
        }
        let left = (n - t) as f64;
        for (g, rb) in target.iter_mut().zip(&remaining) {
            *g = rb / left;
        }
        dual.step(accept.then_some(a), &target);
        rec.push(&dual);
    }
    Ok(acc.finish(&dual, rec, cfg.rng_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::StepSchedule;
    use crate::instance::violation_norm;

    #[test]
    fn soa_single_step_accept() {
        let inst = Instance::new(vec![1.0], vec![1.0], vec![0.5]).unwrap();
        let tr = run_soa(&inst, &AlgorithmConfig::soa(StepSchedule::ConstantUnit)).unwrap();
        assert_eq!(tr.decisions, vec![1]);
        assert_eq!(tr.final_prices, vec![0.5]);
    }

    #[test]
    fn soa_single_step_reject_projection_binds() {
        let inst = Instance::new(vec![-1.0], vec![1.0], vec![0.5]).unwrap();
        let tr = run_soa(&inst, &AlgorithmConfig::soa(StepSchedule::ConstantUnit)).unwrap();
        assert_eq!(tr.decisions, vec![0]);
        assert_eq!(tr.final_prices, vec![0.0]);
    }

    #[test]
    fn soa_records_history() {
        let inst = Instance::new(vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0], vec![1.5]).unwrap();
        let cfg = AlgorithmConfig::soa(StepSchedule::ConstantUnit).with_history();
        let tr = run_soa(&inst, &cfg).unwrap();
        let h = tr.dual_norm_history.unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(h[0], 0.0);
        assert_eq!(tr.max_dual_norm, h.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn soa_rejects_wrong_config() {
        let inst = Instance::new(vec![1.0], vec![1.0], vec![0.5]).unwrap();
        assert!(run_soa(&inst, &AlgorithmConfig::dla()).is_err());
        assert!(run_sfa(&inst, &AlgorithmConfig::soa(StepSchedule::OneOverSqrtN)).is_err());
    }

    #[test]
    fn sfa_gate_blocks_third_acceptance() {
        let inst = Instance::new(vec![1.0; 3], vec![1.0; 3], vec![2.0]).unwrap();
        let tr = run_sfa(&inst, &AlgorithmConfig::sfa(StepSchedule::OneOverSqrtN)).unwrap();
        // p stays below 1 throughout, so every column is tentatively accepted.
        assert_eq!(tr.tentative.as_deref(), Some(&[1, 1, 1][..]));
        assert_eq!(tr.decisions, vec![1, 1, 0]);
        assert_eq!(violation_norm(&inst, &tr.decisions).unwrap(), 0.0);
    }

    #[test]
    fn sfa_gate_with_unit_capacity() {
        let inst = Instance::new(vec![1.0; 3], vec![1.0; 3], vec![1.0]).unwrap();
        let tr = run_sfa(&inst, &AlgorithmConfig::sfa(StepSchedule::OneOverSqrtN)).unwrap();
        assert_eq!(tr.tentative.as_deref(), Some(&[1, 1, 1][..]));
        assert_eq!(tr.decisions, vec![1, 0, 0]);
    }

    #[test]
    fn sna_rejecting_stream_keeps_zero_prices() {
        let inst = Instance::from_rows(
            vec![-1.0, 0.0, -0.5, -2.0],
            &[vec![1.0, 1.0, 1.0, 1.0], vec![0.5, 0.5, 0.5, 0.5]],
            vec![2.0, 2.0],
        )
        .unwrap();
        let tr = run_sna(&inst, &AlgorithmConfig::sna(StepSchedule::OneOverSqrtT).with_history()).unwrap();
        assert_eq!(tr.decisions, vec![0; 4]);
        assert!(tr.dual_norm_history.unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(tr.final_prices, vec![0.0, 0.0]);
    }

    #[test]
    fn sna_first_step_target() {
        // n = 2: after accepting a_1 = 1.5 from b = 2, the target is b_1/(n−1) = 0.5.
        let inst = Instance::new(vec![1.0, 1.0], vec![1.5, 1.0], vec![2.0]).unwrap();
        let tr = run_sna(&inst, &AlgorithmConfig::sna(StepSchedule::ConstantUnit)).unwrap();
        // p_2 = max(0 + 1·(1.5 − 0.5), 0) = 1, and r_2 = 1 = a_2·p_2 is a tie, so reject.
        assert_eq!(tr.decisions, vec![1, 0]);
        assert_eq!(tr.final_prices, vec![1.0]);
    }
}
