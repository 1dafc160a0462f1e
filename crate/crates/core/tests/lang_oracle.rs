mod common;

use common::{evaluator_mismatches, random_formula, random_series};
use pcv_core::lang::{eval_all, render_formula, simplify, Formula};
use pcv_core::parse_formula;
use pcv_core::trace::substream;
use proptest::prelude::*;

#[test]
fn evaluator_agrees_with_reference_semantics() {
    let mismatches = evaluator_mismatches(10_000);
    assert!(mismatches.is_empty(), "{} mismatches, first {:?}", mismatches.len(), mismatches[0]);
}

#[test]
fn printed_forms_parse_to_expected_trees() {
    let f = parse_formula("x > 0 until always (next (y) == 1)").unwrap();
    assert_eq!(render_formula(&f), "((x) > (0)) until (always ((next (y)) == (1)))");
    let g = parse_formula("not x <= -(0.5) and (y != 2 implies eventually z < 1)").unwrap();
    assert_eq!(parse_formula(&render_formula(&g)).unwrap(), g);
}

fn formula_and_trace(seed: u64) -> (Formula, common::Series) {
    let mut rng = substream(seed, "lang-prop", 0);
    (random_formula(&mut rng, 4), random_series(&mut rng, 6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn render_then_parse_is_canonical(seed in any::<u64>()) {
        // Negated literals parse back as negative constants, so the first
        // round trip may change the tree but never the text or the meaning.
        let (f, tr) = formula_and_trace(seed);
        let text = render_formula(&f);
        let g = parse_formula(&text).unwrap();
        prop_assert_eq!(render_formula(&g), text);
        prop_assert_eq!(parse_formula(&render_formula(&g)).unwrap(), g.clone());
        prop_assert_eq!(eval_all(&g, &tr), eval_all(&f, &tr));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let (f, _) = formula_and_trace(seed);
        let back: Formula = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn simplify_preserves_truth_everywhere(seed in any::<u64>()) {
        let (f, tr) = formula_and_trace(seed);
        prop_assert_eq!(eval_all(&simplify(&f), &tr), eval_all(&f, &tr));
    }

    #[test]
    fn simplify_is_idempotent(seed in any::<u64>()) {
        let (f, _) = formula_and_trace(seed);
        let once = simplify(&f);
        prop_assert_eq!(simplify(&once), once);
    }

    #[test]
    fn double_negation_and_de_morgan(seed in any::<u64>()) {
        let (f, tr) = formula_and_trace(seed);
        let (g, _) = formula_and_trace(seed.wrapping_add(1));
        prop_assert_eq!(eval_all(&Formula::not(Formula::not(f.clone())), &tr), eval_all(&f, &tr));
        let lhs = Formula::not(Formula::and(f.clone(), g.clone()));
        let rhs = Formula::or(Formula::not(f), Formula::not(g));
        prop_assert_eq!(eval_all(&lhs, &tr), eval_all(&rhs, &tr));
    }
}
