//! Exact binomial tails over rationals, independent of the floating-point
//! routines in [`crate::stats`]. Used by tests and the self-test command.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::num::Num;

/// `P[Bin(n, p) >= k]` computed exactly by summing binomial terms.
pub fn exact_upper_tail(k: u64, n: u64, p: &BigRational) -> BigRational {
    let (sum, scale) = tail_parts(k, n, p);
    BigRational::new(sum, scale)
}

/// Numerator and denominator of the tail, unreduced.
fn tail_parts(k: u64, n: u64, p: &BigRational) -> (BigInt, BigInt) {
    assert!(!p.is_negative() && *p <= BigRational::one(), "p outside [0, 1]");
    let a = p.numer().clone();
    let b = p.denom().clone();
    let q = &b - &a;
    if k == 0 || q.is_zero() {
        return (BigInt::one(), BigInt::one());
    }
    if k > n || a.is_zero() {
        return (BigInt::zero(), BigInt::one());
    }
    // term_i = C(n, i) a^i q^(n-i); the tail is sum_{i >= k} term_i / b^n.
    let mut term = binomial(n, k) * a.pow(k as u32) * q.pow((n - k) as u32);
    let mut sum = term.clone();
    for i in k..n {
        term = term * BigInt::from(n - i) * &a / (BigInt::from(i + 1) * &q);
        sum += &term;
    }
    (sum, b.pow(n as u32))
}

/// Whether `P[Bin(n, p) >= k] <= alpha`, decided without reducing fractions.
pub fn tail_at_most(k: u64, n: u64, p: &BigRational, alpha: &BigRational) -> bool {
    let (sum, scale) = tail_parts(k, n, p);
    sum * alpha.denom() <= alpha.numer() * scale
}

fn binomial(n: u64, k: u64) -> BigInt {
    let k = k.min(n - k);
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

fn alpha_of(c: f64) -> BigRational {
    BigRational::one() - Num::from_f64(c).expect("finite confidence").0
}

fn exact(p: f64) -> BigRational {
    Num::from_f64(p).expect("finite probability").0
}

const GRID_BITS: u32 = 40;

/// `p` moved outward to a multiple of 2^-40, keeping integers small.
fn dyadic(p: f64, up: bool) -> BigRational {
    let scaled = p * (1u64 << GRID_BITS) as f64;
    let m = if up { scaled.ceil() } else { scaled.floor() };
    BigRational::new(BigInt::from(m as u64), BigInt::one() << GRID_BITS)
}

/// Lower bound found by bisection on exact tails, to within `tol`, rounded down.
pub fn oracle_lower_bound(k: u64, n: u64, c: f64, tol: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let alpha = alpha_of(c);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if tail_at_most(k, n, &exact(mid), &alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Whether `p` is within `tol` below the exact lower bound: the tail at `p`
/// is at most `1 - c` and the tail at `p + tol` exceeds it.
///
/// Both probes are moved outward to a coarser dyadic grid (monotonicity of
/// the tail makes this conservative).
pub fn certifies_lower_bound(k: u64, n: u64, c: f64, p: f64, tol: f64) -> bool {
    if k == 0 {
        return p == 0.0;
    }
    let alpha = alpha_of(c);
    let upper = (p + tol).min(1.0);
    tail_at_most(k, n, &dyadic(p, true), &alpha) && !tail_at_most(k, n, &dyadic(upper, false), &alpha)
}

pub fn exact_upper_tail_f64(k: u64, n: u64, p: f64) -> f64 {
    exact_upper_tail(k, n, &exact(p)).to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(exact_upper_tail(1, 2, &half), BigRational::new(3.into(), 4.into()));
        assert_eq!(exact_upper_tail(0, 5, &half), BigRational::one());
        assert_eq!(exact_upper_tail(3, 3, &half), BigRational::new(1.into(), 8.into()));
        assert_eq!(binomial(10, 3), BigInt::from(120));
    }

    #[test]
    fn closed_form_all_successes() {
        let p = oracle_lower_bound(10, 10, 0.95, 1e-10);
        assert!((p - 0.05f64.powf(0.1)).abs() < 1e-9);
    }
}
