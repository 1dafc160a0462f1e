//! One-sided Clopper-Pearson lower bounds and testing counters.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need 0 <= k <= n and n >= 1, got k = {k}, n = {n}")]
    Counts { k: u64, n: u64 },
    #[error("confidence must lie strictly between 0 and 1, got {0}")]
    Confidence(f64),
    #[error("probability bound ({p}, {c}) outside [0, 1]")]
    Bound { p: f64, c: f64 },
}

/// A lower bound `p` on a satisfaction probability, held with confidence `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbBound {
    pub p: f64,
    pub c: f64,
}

impl ProbBound {
    pub const CERTAIN: ProbBound = ProbBound { p: 1.0, c: 1.0 };
    pub const REFUTED: ProbBound = ProbBound { p: 0.0, c: 1.0 };

    pub fn new(p: f64, c: f64) -> Result<Self, StatsError> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&c) {
            return Err(StatsError::Bound { p, c });
        }
        Ok(ProbBound { p, c })
    }
}

/// `P[Bin(n, p) >= k]`, via the regularized incomplete beta function.
pub fn binomial_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 || p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 || k > n {
        return 0.0;
    }
    beta_reg(k as f64, (n - k + 1) as f64, p)
}

const ROUNDING_MARGIN: f64 = 1e-10;

/// The largest `p` (to within 1e-9, rounded down) such that
/// `P[Bin(n, p) >= k] <= 1 - c`.
///
/// With probability at least `c` the returned value does not exceed the true
/// success probability.
pub fn clopper_pearson_lower(k: u64, n: u64, c: f64) -> Result<f64, StatsError> {
    if n == 0 || k > n {
        return Err(StatsError::Counts { k, n });
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(StatsError::Confidence(c));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let alpha = 1.0 - c;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if k == n {
        // Closed form; seeds a narrow bracket that bisection then confirms.
        let guess = alpha.powf(1.0 / n as f64);
        let (a, b) = ((guess - 1e-9).max(0.0), (guess + 1e-9).min(1.0));
        if binomial_upper_tail(k, n, a) <= alpha && binomial_upper_tail(k, n, b) > alpha {
            lo = a;
            hi = b;
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if binomial_upper_tail(k, n, mid) <= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The incomplete beta carries relative error near 1e-15; stepping down
    // keeps the result below the exact root.
    Ok((lo - ROUNDING_MARGIN).max(0.0))
}

/// Counters from one testing run.
///
/// `n_sampled` counts every scene draw, rejected or not. For the weak-merge
/// testing procedure, scenes that pass statically are included in
/// `n_verified` and also reported in `n_static_pass`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestingOutcome {
    pub n_sampled: u64,
    pub n_rejected: u64,
    pub n_verified: u64,
    pub n_a_violated: u64,
    pub n_g_violated: u64,
    #[serde(default)]
    pub n_static_pass: u64,
    /// Traces that aborted with a component error; excluded from all other counts.
    #[serde(default)]
    pub n_aborted: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl TestingOutcome {
    pub fn n_eff(&self) -> u64 {
        self.n_sampled - self.n_rejected
    }

    pub fn k(&self) -> u64 {
        self.n_verified + self.n_a_violated
    }

    pub fn mean_correctness(&self) -> f64 {
        if self.n_eff() == 0 {
            return 0.0;
        }
        self.k() as f64 / self.n_eff() as f64
    }

    pub fn is_consistent(&self) -> bool {
        self.n_sampled == self.n_rejected + self.n_verified + self.n_a_violated + self.n_g_violated
            && self.n_static_pass <= self.n_verified
    }

    /// Adds another run's counters (merging is order-independent).
    pub fn merge(&mut self, other: &TestingOutcome) {
        self.n_sampled += other.n_sampled;
        self.n_rejected += other.n_rejected;
        self.n_verified += other.n_verified;
        self.n_a_violated += other.n_a_violated;
        self.n_g_violated += other.n_g_violated;
        self.n_static_pass += other.n_static_pass;
        self.n_aborted += other.n_aborted;
    }

    pub fn bound(&self, c: f64) -> Result<ProbBound, StatsError> {
        let p = clopper_pearson_lower(self.k(), self.n_eff(), c)?;
        Ok(ProbBound { p, c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes() {
        assert_eq!(clopper_pearson_lower(0, 10, 0.95).unwrap(), 0.0);
    }

    #[test]
    fn all_successes_closed_form() {
        let p = clopper_pearson_lower(10, 10, 0.95).unwrap();
        assert!((p - 0.05f64.powf(0.1)).abs() < 1e-9);
        assert!((p - 0.7411).abs() < 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(clopper_pearson_lower(3, 2, 0.9).is_err());
        assert!(clopper_pearson_lower(0, 0, 0.9).is_err());
        assert!(clopper_pearson_lower(1, 2, 1.0).is_err());
        assert!(clopper_pearson_lower(1, 2, 0.0).is_err());
    }

    #[test]
    fn monotone_in_k_and_c() {
        let mut prev = 0.0;
        for k in 0..=40 {
            let p = clopper_pearson_lower(k, 40, 0.95).unwrap();
            assert!(p >= prev);
            prev = p;
        }
        let a = clopper_pearson_lower(30, 40, 0.9).unwrap();
        let b = clopper_pearson_lower(30, 40, 0.99).unwrap();
        assert!(a >= b);
    }

    #[test]
    fn converges_to_ratio() {
        let small = clopper_pearson_lower(90, 100, 0.95).unwrap();
        let large = clopper_pearson_lower(90_000, 100_000, 0.95).unwrap();
        assert!(small < large && large < 0.9 && 0.9 - large < 0.003);
    }

    #[test]
    fn outcome_arithmetic() {
        let o = TestingOutcome {
            n_sampled: 4153,
            n_rejected: 559,
            n_verified: 3374,
            n_a_violated: 0,
            n_g_violated: 220,
            ..Default::default()
        };
        assert!(o.is_consistent());
        assert_eq!((o.k(), o.n_eff()), (3374, 3594));
        assert!((o.mean_correctness() * 100.0 - 93.88).abs() < 0.005);
    }
}
