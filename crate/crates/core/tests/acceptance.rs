//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p pcv-core --test acceptance`. Set `PCV_BLESS=1` to
//! rewrite the golden assurance case.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pcv_core::aeb::{
    model, reachability, run_campaign, simulate, AebConfig, AebScenario, CampaignOptions, Mode, ReachPayload,
    SensorParams,
};
use pcv_core::algebra::union_bound;
use pcv_core::assurance::{export_json, render_case, RenderOptions};
use pcv_core::oracle::certifies_lower_bound;
use pcv_core::stats::{clopper_pearson_lower, ProbBound, TestingOutcome};
use pcv_core::trace::par_map;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn union_arithmetic() -> Outcome {
    let close = |b: ProbBound, p: f64| (b.p - p).abs() <= 1e-12 && (b.c - 0.998001).abs() <= 1e-12;
    let start = Instant::now();
    let a = union_bound(ProbBound { p: 0.9255, c: 0.999 }, ProbBound { p: 0.99, c: 0.999 });
    let b = union_bound(ProbBound { p: 0.9559, c: 0.999 }, ProbBound { p: 0.99, c: 0.999 });
    let elapsed = start.elapsed();
    check(
        close(a, 0.9155) && close(b, 0.9459) && elapsed < Duration::from_millis(1),
        format!("({:.4}, {}) and ({:.4}, {}) in {elapsed:?}", a.p, a.c, b.p, b.c),
    )
}

fn weak_merge_bookkeeping() -> Outcome {
    let o = TestingOutcome {
        n_sampled: 6329,
        n_rejected: 810,
        n_verified: 1876 + 3446,
        n_g_violated: 197,
        n_static_pass: 1876,
        ..Default::default()
    };
    let mean = o.mean_correctness() * 100.0;
    check(
        o.is_consistent() && o.k() == 5322 && o.n_eff() == 5519 && (mean - 96.43).abs() <= 0.01,
        format!("k = {}, n_eff = {}, mean correctness {mean:.2}%", o.k(), o.n_eff()),
    )
}

fn clopper_pearson() -> Outcome {
    let cases: Vec<(u64, u64)> = (1..=200u64).flat_map(|n| (0..=n).map(move |k| (k, n))).collect();
    let mut mismatches = 0;
    for c in [0.9, 0.99, 0.999] {
        mismatches += par_map(4, cases.len(), |i| {
            let (k, n) = cases[i];
            !certifies_lower_bound(k, n, c, clopper_pearson_lower(k, n, c).unwrap(), 1e-6)
        })
        .into_iter()
        .filter(|&bad| bad)
        .count();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = (1.0f64, 0.0);
    for c in [0.9, 0.99, 0.999] {
        for q in [0.5, 0.9, 0.99] {
            for n in [50u64, 500] {
                let dist = Binomial::new(n, q).unwrap();
                let covered = (0..2000).filter(|_| clopper_pearson_lower(dist.sample(&mut rng), n, c).unwrap() <= q).count();
                let slack = covered as f64 / 2000.0 - c;
                if slack < worst.0 {
                    worst = (slack, c);
                }
            }
        }
    }
    check(
        mismatches == 0 && worst.0 >= -0.01,
        format!("{mismatches} grid mismatches over 3 x {} cases; worst coverage c{:+.4} at c = {}", cases.len(), worst.0, worst.1),
    )
}

fn evaluator_oracle() -> Outcome {
    let mismatches = common::evaluator_mismatches(10_000);
    check(mismatches.is_empty(), format!("{} mismatches over 10000 cases", mismatches.len()))
}

fn operator_oracle() -> Outcome {
    let (ops, undefined) = common::ops::operator_failures(10_000);
    let toy = common::ops::toy_failures(300);
    let mixture = common::ops::mixture_failures(300);
    check(
        ops.is_empty() && toy.is_empty() && mixture.is_empty(),
        format!(
            "{} operator failures over 10000 traces ({undefined} with an undefined operand), {} toy, {} mixture",
            ops.len(),
            toy.len(),
            mixture.len()
        ),
    )
}

fn filter_model_check() -> Outcome {
    let report = reachability(&ReachPayload::default(), model::p_buffer_dist);
    let mut config = AebConfig::default();
    config.sensors = SensorParams { radar_slope: 0.0, laser_rain: 0.0, laser_snow: 0.0, camera_sigma: 0.0, ..SensorParams::default() };
    let scenario = AebScenario::new(config);
    let episodes = par_map(4, 125_000, |i| simulate(&scenario, 6, "in-band", i as u64));
    let run: Vec<_> = episodes.iter().filter(|e| !e.rejected).take(100_000).collect();
    let out_of_band = run.iter().filter(|e| !e.perception_in_band).count();
    let violations = run.iter().filter(|e| e.closest <= 5_000).count();
    check(
        report.violation.is_none() && run.len() == 100_000 && out_of_band == 0 && violations == 0,
        format!(
            "{} reachable states, {}; {} episodes, {out_of_band} out of band, {violations} within 5 m",
            report.reachable,
            if report.violation.is_none() { "none unsafe" } else { "VIOLATION" },
            run.len()
        ),
    )
}

fn dominance() -> Outcome {
    let mut problems = Vec::new();
    let mut rows = Vec::new();
    for seed in [1u64, 2, 3] {
        for budget in [500u64, 1_000, 5_000] {
            let (_, naive) = run_campaign(&CampaignOptions::new(Mode::Naive, budget, seed)).map_err(|e| e.to_string())?;
            let (_, opt) = run_campaign(&CampaignOptions::new(Mode::Optimized, budget, seed)).map_err(|e| e.to_string())?;
            let fraction = opt.static_fraction.unwrap_or(0.0);
            rows.push(format!("{seed}/{budget}: {:.4} vs {:.4}, static {fraction:.3}", naive.bound.p, opt.bound.p));
            if opt.bound.p < naive.bound.p {
                problems.push(format!("seed {seed}, budget {budget}: optimized below naive"));
            }
            for b in [naive.bound, opt.bound] {
                if (b.c - 0.998001).abs() > 1e-12 {
                    problems.push(format!("seed {seed}, budget {budget}: confidence {}", b.c));
                }
            }
            // Static fraction on the 5000-sample runs only.
            if budget == 5_000 && (fraction - 0.35).abs() > 0.02 {
                problems.push(format!("seed {seed}: static fraction {fraction:.4}"));
            }
        }
    }
    eprintln!("    {}", rows.join("\n    "));
    check(problems.is_empty(), if problems.is_empty() { format!("{} campaign pairs", rows.len()) } else { problems.join("; ") })
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for mode in [Mode::Naive, Mode::Optimized] {
        let json = |workers: usize| -> Result<String, String> {
            let mut opts = CampaignOptions::new(mode, 1_000, 7);
            opts.workers = workers;
            let (root, _) = run_campaign(&opts).map_err(|e| e.to_string())?;
            Ok(export_json(&root, None))
        };
        if json(1)? != json(4)? {
            differing.push(mode.name());
        }
    }
    check(differing.is_empty(), format!("1 vs 4 workers, both modes; differing: {differing:?}"))
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/naive_seed7.txt")
}

fn golden_case() -> Outcome {
    let (root, _) = run_campaign(&CampaignOptions::new(Mode::Naive, 4_000, 7)).map_err(|e| e.to_string())?;
    let text = render_case(&root, &RenderOptions::default());
    let path = golden_path();
    if std::env::var_os("PCV_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &text).map_err(|e| e.to_string())?;
    }
    let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let sections = ["Minimum ", "Assumptions:", "Guarantees:", "Evidence:", " Verified, ", " Rejected, ", "A-Violated", "G-Violated"];
    let missing: Vec<_> = sections.iter().filter(|s| !text.contains(*s)).collect();
    check(
        text == golden && missing.is_empty(),
        format!("{} lines, identical: {}, missing sections: {missing:?}", text.lines().count(), text == golden),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("union-bound arithmetic", Duration::from_secs(1), union_arithmetic),
        ("weak-merge bookkeeping", Duration::from_secs(1), weak_merge_bookkeeping),
        ("Clopper-Pearson oracle and coverage", Duration::from_secs(60), clopper_pearson),
        ("LTLf evaluator oracle", Duration::from_secs(30), evaluator_oracle),
        ("operator semantics oracle", Duration::from_secs(60), operator_oracle),
        ("safety-filter model check", Duration::from_secs(600), filter_model_check),
        ("end-to-end dominance", Duration::from_secs(900), dominance),
        ("determinism across workers", Duration::from_secs(600), determinism),
        ("golden assurance case", Duration::from_secs(600), golden_case),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit:?} limit")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!("criterion {} {}: {name} [{:.1} s] {detail}", i + 1, if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
