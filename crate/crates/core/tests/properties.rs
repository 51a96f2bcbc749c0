// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use robust_bandits::adversaries::{AdversaryState, ContaminationRule, ScriptTable};
use robust_bandits::algorithms::{close_gaps, close_gaps_known_mu_star, epoch_plan, AlgoSpec, EpochRecord};
use robust_bandits::harness::quantile_sorted;
use robust_bandits::metrics::{
    approx_eq, corruption_level, discounted_corruption, discounted_corruption_recursive, neumaier_sum, pseudo_regret,
    pseudo_regret_by_counts, pseudo_regret_total, pull_counts, realized_regret, realized_regret_incremental,
};
use robust_bandits::stats::{check_epoch_lengths, le_eps};
use robust_bandits::{run_protocol, BanditInstance, RunSettings, RunTrace};

fn algo_strategy() -> impl Strategy<Value = AlgoSpec> {
    prop_oneof![
        (0.001f64..0.05).prop_map(|s| AlgoSpec::Barbar { lambda_scale: s }),
        (0.001f64..0.05).prop_map(|s| AlgoSpec::BarbarKnownMustar {
            lambda_scale: s,
            mu_star: 0.99
        }),
        Just(AlgoSpec::Ucb),
        Just(AlgoSpec::Exp3),
        Just(AlgoSpec::Aae),
    ]
}

fn adversary_strategy(k: usize) -> impl Strategy<Value = AdversaryState> {
    let rule = prop_oneof![
        Just(ContaminationRule::Flip),
        Just(ContaminationRule::Zero),
        Just(ContaminationRule::One),
        (0..k).prop_map(ContaminationRule::ZeroArm),
    ];
    prop_oneof![
        Just(AdversaryState::null()),
        (0.01f64..1.0, rule.clone()).prop_map(|(eta, r)| AdversaryState::fixed_rate(eta, r).unwrap()),
        (1.0f64..300.0, rule).prop_map(|(b, r)| AdversaryState::prefix(b, r).unwrap()),
        prop::collection::vec((1u64..600, 0..k, -0.5f64..1.5), 0..40)
            .prop_map(|rows| AdversaryState::scripted(ScriptTable::from_entries(rows))),
    ]
}

fn scenario() -> impl Strategy<Value = (Vec<f64>, AlgoSpec, AdversaryState, u64, u64)> {
    (2usize..5).prop_flat_map(|k| {
        (
            prop::collection::vec(0.0f64..0.95, k),
            algo_strategy(),
            adversary_strategy(k),
            50u64..600,
            any::<u64>(),
        )
            .prop_map(|(mut means, algo, adv, horizon, seed)| {
                means[0] = 0.99;
                (means, algo, adv, horizon, seed)
            })
    })
}

fn play(means: &[f64], algo: &AlgoSpec, mut adv: AdversaryState, horizon: u64, seed: u64) -> RunTrace {
    let inst = BanditInstance::bernoulli(means).unwrap();
    let mut player = algo.build(means.len(), 0.05, horizon).unwrap();
    let mut s = RunSettings::new(horizon, 0.05, seed, 0);
    s.store_vectors = true;
    run_protocol(&inst, player.as_mut(), &mut adv, &s).unwrap()
}

fn record(c: f64, n: u64) -> EpochRecord {
    EpochRecord {
        m: 1,
        start: 1,
        end: n,
        planned_end: n,
        planned: vec![n],
        planned_total: n,
        pulls: vec![n],
        sums: vec![0.0],
        gaps_prev: vec![1.0],
        means: None,
        r_star: None,
        leader: None,
        gaps: None,
        completed: true,
        corruption: vec![c],
        corruption_max: c,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_invariants((means, algo, adv, horizon, seed) in scenario()) {
        let trace = play(&means, &algo, adv, horizon, seed);
        let k = means.len();
        prop_assert_eq!(trace.len() as u64, horizon);
        prop_assert!(trace.choices().iter().all(|&c| c < k));
        prop_assert_eq!(pull_counts(&trace).iter().sum::<u64>(), horizon);

        let total = pseudo_regret_total(&trace);
        prop_assert!(approx_eq(total, pseudo_regret_by_counts(&trace), 1e-12));
        let checkpoints: Vec<u64> = (1..=horizon).step_by(17).chain([horizon]).collect();
        let traj = pseudo_regret(&trace, &checkpoints);
        prop_assert!(traj.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(approx_eq(traj.last(), total, 1e-12));
        prop_assert!(approx_eq(
            realized_regret(&trace).unwrap(),
            realized_regret_incremental(&trace).unwrap(),
            1e-12
        ));

        for r in trace.rounds() {
            let (raw, cor) = (r.raw.unwrap(), r.corrupted.unwrap());
            prop_assert!(cor.iter().all(|x| (0.0..=1.0).contains(x)));
            let inf = raw.iter().zip(cor).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert_eq!(inf, r.corruption_inf);
        }

        let level = corruption_level(&trace);
        if !trace.epochs().is_empty() {
            let per_epoch: f64 = level.per_epoch.iter().map(|e| e.inf_sum).sum();
            prop_assert!(approx_eq(level.total, per_epoch, 1e-12));
            let a = discounted_corruption(trace.epochs());
            let b = discounted_corruption_recursive(trace.epochs());
            prop_assert!(a.iter().zip(&b).all(|(x, y)| approx_eq(*x, *y, 1e-12)));
        }
        if matches!(algo, AlgoSpec::Barbar { .. }) {
            let report = check_epoch_lengths(&trace).unwrap();
            prop_assert!(report.passed(), "{:?}", report.violations);
        }
    }

    #[test]
    fn replay_is_deterministic((means, algo, adv, horizon, seed) in scenario()) {
        let a = play(&means, &algo, adv.clone(), horizon, seed);
        let b = play(&means, &algo, adv, horizon, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn plan_rounds_up(lambda in 0.01f64..1e5, gaps in prop::collection::vec(0.001f64..=1.0, 2..8)) {
        let plan = epoch_plan(lambda, &gaps);
        prop_assert_eq!(plan.total, plan.planned.iter().sum::<u64>());
        for (&n, &g) in plan.planned.iter().zip(&gaps) {
            let exact = lambda / (g * g);
            prop_assert!(n as f64 >= exact && (n as f64) < exact.max(1.0) + 1.0);
        }
    }

    #[test]
    fn gap_updates_stay_in_range(
        m in 1u32..30,
        pairs in prop::collection::vec((0.0f64..=1.0, 0.001f64..=1.0), 2..8),
        mu_star in 0.0f64..=1.0,
    ) {
        let (means, prev): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let floor = 0.5f64.powi(m as i32);
        let up = close_gaps(m, &means, &prev);
        prop_assert!(up.gaps.iter().all(|&g| g >= floor && g <= 1.0));
        prop_assert_eq!(up.gaps[up.leader], floor);
        let known = close_gaps_known_mu_star(m, &means, &prev, mu_star);
        for (g, p) in known.gaps.iter().zip(&prev) {
            prop_assert!(*g >= floor && *g <= 1.0 && *g >= (p / 2.0).min(1.0));
        }
    }

    #[test]
    fn rho_recursion(epochs in prop::collection::vec((0.0f64..1e4, 1u64..1_000_000), 1..25)) {
        let records: Vec<EpochRecord> = epochs.iter().map(|&(c, n)| record(c, n)).collect();
        let a = discounted_corruption(&records);
        let b = discounted_corruption_recursive(&records);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(approx_eq(*x, *y, 1e-12), "{} vs {}", x, y);
        }
    }

    #[test]
    fn neumaier_is_order_insensitive(mut xs in prop::collection::vec(-1e12f64..1e12, 1..200), seed in any::<u64>()) {
        let a = neumaier_sum(xs.iter().copied());
        let n = xs.len();
        for i in 0..n {
            xs.swap(i, (seed as usize).wrapping_add(i * 31) % n);
        }
        let b = neumaier_sum(xs.iter().copied());
        let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((a - b).abs() <= 1e-15 * scale);
    }

    #[test]
    fn quantiles_are_ordered(mut xs in prop::collection::vec(-1e6f64..1e6, 1..100)) {
        xs.sort_by(f64::total_cmp);
        let q: Vec<f64> = [0.0, 0.1, 0.5, 0.9, 1.0].iter().map(|&p| quantile_sorted(&xs, p)).collect();
        prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(q[0], xs[0]);
        prop_assert_eq!(q[4], *xs.last().unwrap());
    }

    #[test]
    fn eps_comparisons(a in -1e9f64..1e9, b in -1e9f64..1e9) {
        prop_assert!(le_eps(a, a));
        prop_assert_eq!(approx_eq(a, b, 1e-12), approx_eq(b, a, 1e-12));
        if a < b {
            prop_assert!(le_eps(a, b));
        }
    }
}

#[test]
fn neumaier_beats_naive() {
    let xs = [1e16, 1.0, -1e16, 1.0];
    assert_eq!(neumaier_sum(xs), 2.0);
}
