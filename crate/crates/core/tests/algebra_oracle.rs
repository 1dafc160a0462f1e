mod common;

use common::ops::{all_traces, built_sat, mixture_failures, operator_failures, random_contract, sat, toy_failures, Raw};
use common::random_bits;
use pcv_core::aeb::{car, certificates, AebConfig, AebScenario, Catalog};
use pcv_core::algebra::{op_compose, op_weak_merge, weak_merge_tested};
use pcv_core::evidence::{verify_testing, Budget, TestConfig};
use pcv_core::trace::substream;
use pcv_core::Contract;

#[test]
fn operators_match_kleene_definitions() {
    let (failures, undefined) = operator_failures(10_000);
    assert!(failures.is_empty(), "{} failures, first {}", failures.len(), failures[0]);
    assert!(undefined > 500, "{undefined}");
}

#[test]
fn exact_probabilities_on_toy_distributions() {
    let failures = toy_failures(300);
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn mixture_bound_for_static_assumptions() {
    let failures = mixture_failures(300);
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn composition_is_semantically_associative() {
    for case in 0..3_000u64 {
        let mut rng = substream(32, "algebra-assoc", case);
        let cs: Vec<Contract> = ["c1", "c2", "c3"].iter().map(|n| random_contract(&mut rng, n)).collect();
        let tr = random_bits(&mut rng, 4);
        let left = op_compose(&op_compose(&cs[0], &cs[1]), &cs[2]);
        let right = op_compose(&cs[0], &op_compose(&cs[1], &cs[2]));
        assert_eq!(built_sat(&left, &tr), built_sat(&right, &tr), "case {case}");
    }
}

#[test]
fn unsaturated_composition_breaks_the_product_rule() {
    let c1 = Contract::parse("c1", "x == 1", "y == 1").unwrap();
    let c2 = Contract::parse("c2", "z == 1", "true").unwrap();
    let mut unsaturated = 0;
    let mut both = 0;
    for t in &all_traces() {
        let raw = Raw::of(&c1, &c2, t);
        unsaturated += sat(raw.compose_unsaturated()) as u32;
        both += (raw.sat1() && raw.sat2()) as u32;
        assert_eq!(sat(raw.compose()), raw.sat1() && raw.sat2());
    }
    // x = 1, y = 0, z = 0 at the first step satisfies the unsaturated composite
    // but not c1.
    assert_eq!(both, 48);
    assert_eq!(unsaturated, 56);
}

#[test]
fn tested_weak_merge_matches_testing_the_merged_contract() {
    let cat = Catalog::build();
    let config = AebConfig::default();
    let certs = certificates(&cat, &config);
    let scenario = AebScenario::new(config.clone());
    let vehicle = car(&config.sensors);
    let cfg = TestConfig::new(Budget::Samples(1_500), 0.999, 5, "perception");
    let (cert, checker) = &certs.perception_known;
    let merged = weak_merge_tested(
        ("merged", "known", "unknown"),
        cert,
        checker,
        &cat.perception_known,
        &cat.perception_unknown,
        &scenario,
        &vehicle,
        &cfg,
    )
    .unwrap();
    let direct = verify_testing(
        "direct",
        &op_weak_merge(&cat.perception_known, &cat.perception_unknown),
        &scenario,
        &vehicle,
        &cfg,
    )
    .unwrap();
    let (m, d) = (merged.meta.outcome.clone().unwrap(), direct.meta.outcome.clone().unwrap());
    assert!(m.n_static_pass > 0);
    assert_eq!(m.n_sampled, d.n_sampled);
    assert_eq!(m.n_rejected, d.n_rejected);
    assert_eq!(m.k(), d.k());
    assert_eq!(m.n_eff(), d.n_eff());
    assert_eq!(merged.bound, direct.bound);
}
