use proptest::prelude::*;

use onlinelp::algorithms::{
    repair_feasibility, run_sfa, run_sna, run_soa, truncate_at_exhaustion, AlgorithmConfig,
    RepairConfig,
};
use onlinelp::dual::StepSchedule;
use onlinelp::generators::{permute, PermutationPlan};
use onlinelp::instance::{dual_saa_objective, threshold_decision, violation_norm, Instance};
use onlinelp::metrics::{aggregate, TrialResult};
use onlinelp::simplex::solve_relaxation;

fn instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-1.0..2.0f64, n),
            prop::collection::vec(-0.5..2.0f64, n * m),
            prop::collection::vec(0.1..0.9f64, m),
        )
            .prop_map(move |(r, a, d)| {
                let b = d.iter().map(|d| d * n as f64).collect();
                Instance::new(r, a, b).unwrap()
            })
    })
}

fn schedule() -> impl Strategy<Value = StepSchedule> {
    prop_oneof![
        Just(StepSchedule::OneOverSqrtN),
        Just(StepSchedule::OneOverSqrtT),
        Just(StepSchedule::ConstantUnit),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn prices_stay_nonnegative(inst in instance(40, 4), s in schedule()) {
        for tr in [
            run_soa(&inst, &AlgorithmConfig::soa(s).with_history()).unwrap(),
            run_sna(&inst, &AlgorithmConfig::sna(s).with_history()).unwrap(),
        ] {
            prop_assert!(tr.final_prices.iter().all(|p| *p >= 0.0));
            let h = tr.dual_norm_history.unwrap();
            prop_assert!(h.iter().all(|v| *v >= 0.0));
            prop_assert!(h.iter().copied().fold(0.0, f64::max) <= tr.max_dual_norm);
        }
    }

    #[test]
    fn threshold_is_monotone_in_reward(
        r in -3.0..3.0f64, bump in 0.0..2.0f64,
        a in prop::collection::vec(-1.0..2.0f64, 3),
        p in prop::collection::vec(0.0..2.0f64, 3),
    ) {
        prop_assert!(threshold_decision(r + bump, &a, &p) >= threshold_decision(r, &a, &p));
    }

    #[test]
    fn saa_objective_is_convex(
        inst in instance(30, 3),
        seed in prop::collection::vec(0.0..3.0f64, 6),
        lambda in 0.0..1.0f64,
    ) {
        let m = inst.m();
        let (p, q) = (&seed[..m], &seed[3..3 + m]);
        let mix: Vec<f64> = p.iter().zip(q).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let f = |x: &[f64]| dual_saa_objective(&inst, x).unwrap();
        prop_assert!(f(&mix) <= lambda * f(p) + (1.0 - lambda) * f(q) + 1e-12);
    }

    #[test]
    fn lp_value_is_permutation_invariant(inst in instance(25, 3), seed in any::<u64>()) {
        let plan = PermutationPlan::random(inst.n(), seed);
        let shuffled = permute(&inst, &plan).unwrap();
        let a = solve_relaxation(&inst).unwrap().objective;
        let b = solve_relaxation(&shuffled).unwrap().objective;
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + a.abs()));
        let back = permute(&shuffled, &plan.inverse()).unwrap();
        prop_assert_eq!(back.rewards(), inst.rewards());
        prop_assert_eq!(back.columns(), inst.columns());
    }

    #[test]
    fn lp_bounds_any_feasible_binary(inst in instance(25, 3), s in schedule()) {
        let lp = solve_relaxation(&inst).unwrap().objective;
        let tr = run_sfa(&inst, &AlgorithmConfig::sfa(s)).unwrap();
        prop_assert_eq!(violation_norm(&inst, &tr.decisions).unwrap(), 0.0);
        prop_assert!(tr.objective <= lp + 1e-7);
    }

    #[test]
    fn repair_and_truncation_only_remove(inst in instance(60, 3), seed in any::<u64>()) {
        prop_assume!(inst.n() >= 3);
        let tr = run_soa(&inst, &AlgorithmConfig::soa(StepSchedule::OneOverSqrtT)).unwrap();
        let fixed = repair_feasibility(&inst, &tr, &RepairConfig::default(), seed).unwrap();
        let cut = truncate_at_exhaustion(&inst, &tr).unwrap();
        for t in 0..inst.n() {
            prop_assert!(fixed.decisions[t] <= tr.decisions[t]);
            prop_assert!(cut.decisions[t] <= tr.decisions[t]);
        }
        fixed.check_consistency(&inst).unwrap();
        cut.check_consistency(&inst).unwrap();
    }

    #[test]
    fn text_format_round_trips_bits(inst in instance(20, 4)) {
        let back = Instance::from_text(&inst.to_text()).unwrap();
        prop_assert_eq!(back.rewards(), inst.rewards());
        prop_assert_eq!(back.columns(), inst.columns());
        prop_assert_eq!(back.capacity(), inst.capacity());
    }

    #[test]
    fn aggregate_ignores_input_order(
        values in prop::collection::vec((-5.0..5.0f64, 0.0..3.0f64), 1..30),
        seed in any::<u64>(),
    ) {
        let rows: Vec<TrialResult> = values.iter().enumerate().map(|(i, &(regret, violation))| TrialResult {
            algorithm: "soa[sqrt_n]".into(),
            n: 50,
            m: 2,
            trial: i,
            seed: i as u64,
            objective: 10.0 - regret,
            offline_lp_opt: 10.0,
            regret,
            violation,
            competitiveness: Some((10.0 - regret) / 10.0),
            capacity_norm: 3.0,
            max_dual_norm: violation,
            wall_time: 0.0,
        }).collect();
        let plan = PermutationPlan::random(rows.len(), seed);
        let shuffled: Vec<TrialResult> = plan.order.iter().map(|&j| rows[j].clone()).collect();
        let a = aggregate(&rows).unwrap();
        let b = aggregate(&shuffled).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
