//! Quick oracle checks runnable from an installed binary.

use pcv_core::aeb::{model, reachability, ReachPayload};
use pcv_core::oracle::certifies_lower_bound;
use pcv_core::stats::clopper_pearson_lower;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Production Clopper-Pearson bounds against exact rational tails.
pub fn binomial_grid(max_n: u64) -> Check {
    let mut cases = 0;
    let mut failures = Vec::new();
    for n in 1..=max_n {
        for k in 0..=n {
            for c in [0.9, 0.99, 0.999] {
                cases += 1;
                let p = clopper_pearson_lower(k, n, c).unwrap_or(f64::NAN);
                if !certifies_lower_bound(k, n, c, p, 1e-6) {
                    failures.push(format!("k={k} n={n} c={c} p={p}"));
                }
            }
        }
    }
    Check {
        name: "binomial oracle grid",
        passed: failures.is_empty(),
        detail: match failures.first() {
            None => format!("{cases} cases"),
            Some(f) => format!("{} of {cases} cases differ, first {f}", failures.len()),
        },
    }
}

/// Two in-band readings out of three keep the median in band, on a 0.05 m grid.
pub fn median_exhaustive() -> Check {
    let t = 10_000;
    let band: Vec<i64> = (-2..=2).map(|i| t + 50 * i).collect();
    let wild: Vec<i64> = (0..=800).map(|i| 50 * i).collect();
    let mut cases = 0u64;
    let mut bad = None;
    for &a in &band {
        for &b in &band {
            for &w in &wild {
                for r in [[a, b, w], [a, w, b], [w, a, b]] {
                    cases += 1;
                    let m = model::median(r[0], r[1], r[2]);
                    if (m - t).abs() > model::BAND && bad.is_none() {
                        bad = Some(r);
                    }
                }
            }
        }
    }
    Check {
        name: "median exhaustive",
        passed: bad.is_none(),
        detail: match bad {
            None => format!("{cases} cases"),
            Some(r) => format!("median of {r:?} leaves the band"),
        },
    }
}

/// Exhaustive reachability of the filtered braking dynamics.
pub fn filter_reachability() -> Check {
    let report = reachability(&ReachPayload::default(), model::p_buffer_dist);
    Check {
        name: "filter reachability",
        passed: report.violation.is_none(),
        detail: match &report.violation {
            None => format!("{} reachable states, none within 5 m", report.reachable),
            Some(path) => format!("violation after {} steps", path.len() - 1),
        },
    }
}

pub fn run_all() -> Vec<Check> {
    vec![binomial_grid(60), median_exhaustive(), filter_reachability()]
}
