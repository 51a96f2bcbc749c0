// SPDX-License-Identifier: Apache-2.0

use robust_bandits::adversaries::{
    default_target_epoch, AdversaryKind, AdversarySpec, AdversaryState, ContaminationRule, EpochTarget, ScriptTable,
};
use robust_bandits::algorithms::{Barbar, BarbarParams, ConstantArm, Ucb};
use robust_bandits::metrics::corruption_level;
use robust_bandits::{run_protocol, BanditInstance, Player, RunSettings};

fn settings(horizon: u64, replicate: u64) -> RunSettings {
    RunSettings::new(horizon, 0.05, 11, replicate)
}

#[test]
fn default_epoch_formula() {
    assert_eq!(default_target_epoch(2), 3);
    assert_eq!(default_target_epoch(4), 5);
    assert_eq!(default_target_epoch(8), 7);
    assert_eq!(default_target_epoch(3), 4);
}

#[test]
fn epoch_target_window_matches_player_epoch() {
    let inst = BanditInstance::deterministic(&[1.0, 0.5, 0.5, 0.5]).unwrap();
    let params = BarbarParams::new(4, 0.05, 1 << 16).with_lambda_scale(0.002);
    let mut player = Barbar::new(params.clone()).unwrap();
    let mut adv = AdversaryState::epoch_target(EpochTarget::new(params, 3, 0).unwrap());
    let trace = run_protocol(&inst, &mut player, &mut adv, &settings(1 << 16, 0)).unwrap();

    let e3 = trace.epochs().iter().find(|e| e.m == 3).expect("epoch 3 reached");
    let AdversaryKind::EpochTarget(target) = adv.kind() else { unreachable!() };
    assert_eq!(target.window(), Some((e3.start, e3.end)));
    assert_eq!(adv.contaminated_rounds(), e3.rounds());
    assert_eq!(adv.spent(), e3.rounds() as f64);
    assert_eq!(e3.corruption[0], e3.rounds() as f64);
    assert!(e3.corruption[1..].iter().all(|&c| c == 0.0));
    assert_eq!(corruption_level(&trace).total, adv.spent());
    // The attacked epoch hides the best arm, so its gap estimate jumps.
    let gaps = e3.gaps.as_ref().unwrap();
    assert!(gaps[0] > 0.4, "{gaps:?}");
}

#[test]
fn epoch_target_needs_barbar_schedule_for_other_players() {
    let inst = BanditInstance::deterministic(&[1.0, 0.0]).unwrap();
    let spec = AdversarySpec::EpochTarget {
        epoch: 2,
        target_arm: 0,
        lambda_scale: Some(0.01),
    };
    let mut adv = spec.build(2, None, 0.05, 5000).unwrap();
    let mut player = ConstantArm::new(0);
    let trace = run_protocol(&inst, &mut player, &mut adv, &settings(5000, 0)).unwrap();
    let AdversaryKind::EpochTarget(target) = adv.kind() else { unreachable!() };
    let (start, end) = target.window().unwrap();
    assert_eq!(adv.contaminated_rounds(), end - start + 1);
    assert_eq!(corruption_level(&trace).corrupted_rounds, end - start + 1);
    assert!(EpochTarget::new(BarbarParams::new(2, 0.05, 100), 0, 0).is_err());
    assert!(EpochTarget::new(BarbarParams::new(2, 0.05, 100), 3, 2).is_err());
}

#[test]
fn fixed_rate_frequency() {
    let inst = BanditInstance::bernoulli(&[0.7, 0.3]).unwrap();
    let eta = 0.2;
    let horizon = 50_000;
    let mut adv = AdversaryState::fixed_rate(eta, ContaminationRule::Flip).unwrap();
    let mut player = Ucb::new(2);
    let trace = run_protocol(&inst, &mut player, &mut adv, &settings(horizon, 0)).unwrap();
    let rate = adv.contaminated_rounds() as f64 / horizon as f64;
    let sd = (eta * (1.0 - eta) / horizon as f64).sqrt();
    assert!((rate - eta).abs() < 5.0 * sd, "{rate}");
    // Flipping a {0,1} vector moves every coordinate by one.
    assert_eq!(adv.spent(), adv.contaminated_rounds() as f64);
    assert_eq!(corruption_level(&trace).total, adv.spent());
    assert!(AdversaryState::fixed_rate(0.0, ContaminationRule::Flip).is_err());
    assert!(AdversaryState::fixed_rate(1.01, ContaminationRule::Flip).is_err());
}

#[test]
fn prefix_spends_exactly_its_budget() {
    let inst = BanditInstance::deterministic(&[1.0, 0.5]).unwrap();
    let mut adv = AdversaryState::prefix(120.0, ContaminationRule::Zero).unwrap();
    let mut player = ConstantArm::new(1);
    let mut s = settings(1000, 0);
    s.store_vectors = true;
    let trace = run_protocol(&inst, &mut player, &mut adv, &s).unwrap();
    assert_eq!(adv.contaminated_rounds(), 120);
    assert_eq!(adv.spent(), 120.0);
    assert_eq!(adv.declared_budget(), Some(120.0));
    assert_eq!(trace.corrupted(120).unwrap(), &[0.0, 0.0]);
    assert_eq!(trace.corrupted(121).unwrap(), &[1.0, 0.5]);
}

#[test]
fn zero_arm_and_one_rules() {
    let mut out = vec![0.2, 0.7, 0.4];
    ContaminationRule::ZeroArm(1).apply(&mut out);
    assert_eq!(out, vec![0.2, 0.0, 0.4]);
    ContaminationRule::One.apply(&mut out);
    assert_eq!(out, vec![1.0, 1.0, 1.0]);
    ContaminationRule::Flip.apply(&mut out);
    assert_eq!(out, vec![0.0, 0.0, 0.0]);
}

#[test]
fn swap_makes_arms_indistinguishable() {
    let inst = BanditInstance::deterministic(&[1.0, 0.0]).unwrap();
    let horizon = 20_000;
    let mut adv = AdversaryState::swap(2).unwrap();
    let mut player = ConstantArm::new(0);
    let mut s = settings(horizon, 3);
    s.store_vectors = true;
    let trace = run_protocol(&inst, &mut player, &mut adv, &s).unwrap();
    let ones = trace.rounds().filter(|r| r.corrupted.unwrap()[0] == 1.0).count() as f64;
    let frac = ones / horizon as f64;
    assert!((frac - 0.5).abs() < 0.02, "{frac}");
    assert_eq!(adv.spent(), adv.contaminated_rounds() as f64);
    assert!(AdversaryState::swap(3).is_err());
}

#[test]
fn swap_window_limits_corruption() {
    let inst = BanditInstance::deterministic(&[1.0, 0.0]).unwrap();
    let spec = AdversarySpec::Swap { budget: Some(50.0) };
    let mut adv = spec.build(2, None, 0.05, 1000).unwrap();
    let mut player = ConstantArm::new(0);
    let trace = run_protocol(&inst, &mut player, &mut adv, &settings(1000, 0)).unwrap();
    assert!(trace.corruption_events().all(|(t, _, _)| t <= 100));
    assert!(adv.spent() <= 100.0);
    assert!(adv.spent() > 20.0);
}

#[test]
fn scripted_rows_are_applied_and_clamped() {
    let table = ScriptTable::from_entries([(2, 0, 0.0), (2, 1, 1.0), (5, 1, 7.0)]);
    assert_eq!(table.rounds(), 2);
    assert_eq!(table.max_arm(), Some(1));
    let inst = BanditInstance::deterministic(&[0.75, 0.25]).unwrap();
    let mut adv = AdversaryState::scripted(table);
    let mut player = ConstantArm::new(0);
    let mut s = settings(10, 0);
    s.store_vectors = true;
    let trace = run_protocol(&inst, &mut player, &mut adv, &s).unwrap();
    assert_eq!(trace.corrupted(2).unwrap(), &[0.0, 1.0]);
    assert_eq!(trace.corrupted(5).unwrap(), &[0.75, 1.0]);
    assert_eq!(trace.corruption_at(2), 0.75);
    assert_eq!(trace.corruption_at(5), 0.75);
    assert_eq!(adv.spent(), 1.5);
}

#[test]
fn script_csv_validation() {
    let ok = ScriptTable::from_reader("t,arm,value\n3,0,0.5\n".as_bytes(), "x.csv".as_ref()).unwrap();
    assert_eq!(ok.rounds(), 1);
    assert!(ScriptTable::from_reader("t,arm,value\n0,0,0.5\n".as_bytes(), "x.csv".as_ref()).is_err());
    assert!(ScriptTable::from_reader("t,arm,value\n1,0,NaN\n".as_bytes(), "x.csv".as_ref()).is_err());
    assert!(ScriptTable::from_reader("t,arm\n1,0\n".as_bytes(), "x.csv".as_ref()).is_err());
}

#[test]
fn spec_rejects_out_of_range_script_arm() {
    let spec = AdversarySpec::Scripted {
        table: ScriptTable::from_entries([(1, 4, 0.0)]),
    };
    assert!(spec.build(2, None, 0.05, 10).is_err());
}

#[test]
fn null_adversary_is_free() {
    let inst = BanditInstance::bernoulli(&[0.6, 0.5]).unwrap();
    let mut adv = AdversaryState::null();
    let mut player: Box<dyn Player> = Box::new(Ucb::new(2));
    let trace = run_protocol(&inst, player.as_mut(), &mut adv, &settings(500, 0)).unwrap();
    assert_eq!(corruption_level(&trace).total, 0.0);
    assert_eq!(trace.corruption_events().count(), 0);
    assert_eq!(adv.declared_budget(), Some(0.0));
}
