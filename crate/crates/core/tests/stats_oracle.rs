use pcv_core::oracle::{certifies_lower_bound, exact_upper_tail_f64, oracle_lower_bound};
use pcv_core::stats::{clopper_pearson_lower, TestingOutcome};
use pcv_core::trace::par_map;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

#[test]
fn production_matches_exact_tail_grid() {
    let cases: Vec<(u64, u64)> = (1..=200u64).flat_map(|n| (0..=n).map(move |k| (k, n))).collect();
    for c in [0.9, 0.99, 0.999] {
        let bad: Vec<(u64, u64)> = par_map(8, cases.len(), |i| {
            let (k, n) = cases[i];
            let p = clopper_pearson_lower(k, n, c).unwrap();
            (!certifies_lower_bound(k, n, c, p, 1e-6)).then_some((k, n))
        })
        .into_iter()
        .flatten()
        .collect();
        assert!(bad.is_empty(), "c = {c}: mismatches at {:?}", &bad[..bad.len().min(10)]);
    }
}

#[test]
fn large_counts_agree_with_oracle() {
    for (k, n) in [(3374u64, 3594u64), (5322, 5519)] {
        let p = clopper_pearson_lower(k, n, 0.999).unwrap();
        let q = oracle_lower_bound(k, n, 0.999, 1e-9);
        assert!((p - q).abs() < 1e-6, "{k}/{n}: {p} vs {q}");
    }
}

#[test]
fn tail_spot_values() {
    assert!((exact_upper_tail_f64(1, 2, 0.5) - 0.75).abs() < 1e-15);
    assert_eq!(exact_upper_tail_f64(0, 7, 0.3), 1.0);
}

#[test]
fn simulated_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for q in [0.5, 0.9, 0.99] {
        for n in [50u64, 500] {
            let dist = Binomial::new(n, q).unwrap();
            let covered = (0..2000)
                .filter(|_| {
                    let k = dist.sample(&mut rng);
                    clopper_pearson_lower(k, n, 0.95).unwrap() <= q
                })
                .count();
            let freq = covered as f64 / 2000.0;
            assert!(freq >= 0.94, "q = {q}, n = {n}: coverage {freq}");
        }
    }
}

#[test]
fn optimized_case_bookkeeping() {
    let o = TestingOutcome {
        n_sampled: 6329,
        n_rejected: 810,
        n_verified: 1876 + 3446,
        n_a_violated: 0,
        n_g_violated: 197,
        n_static_pass: 1876,
        ..Default::default()
    };
    assert!(o.is_consistent());
    assert_eq!((o.k(), o.n_eff()), (5322, 5519));
    assert!((o.mean_correctness() * 100.0 - 96.43).abs() <= 0.01);
}
