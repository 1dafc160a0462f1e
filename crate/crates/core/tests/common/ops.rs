//! Contract operators evaluated straight from raw truth values, plus exact
//! probabilities over every length-2 trace of three bit variables.

use pcv_core::algebra::{op_compose, op_conjoin, op_strong_merge, op_weak_merge};
use pcv_core::lang::{satisfies, BinOp, CmpOp, Expr};
use pcv_core::trace::substream;
use pcv_core::{Contract, Formula, Num, TruthValue};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_bits, random_formula, ref_truth, Series, VARS};
use TruthValue::{False, True, Undefined};

pub fn not(a: TruthValue) -> TruthValue {
    match a {
        True => False,
        False => True,
        Undefined => Undefined,
    }
}

pub fn and(a: TruthValue, b: TruthValue) -> TruthValue {
    match (a, b) {
        (False, _) | (_, False) => False,
        (True, True) => True,
        _ => Undefined,
    }
}

pub fn or(a: TruthValue, b: TruthValue) -> TruthValue {
    not(and(not(a), not(b)))
}

pub fn implies(a: TruthValue, b: TruthValue) -> TruthValue {
    or(not(a), b)
}

/// Raw truth values of `A1, G1, A2, G2` at the first position.
pub struct Raw {
    pub a1: TruthValue,
    pub g1: TruthValue,
    pub a2: TruthValue,
    pub g2: TruthValue,
}

impl Raw {
    pub fn of(c1: &Contract, c2: &Contract, tr: &Series) -> Raw {
        Raw {
            a1: ref_truth(&c1.assumptions, tr, 0),
            g1: ref_truth(&c1.guarantees, tr, 0),
            a2: ref_truth(&c2.assumptions, tr, 0),
            g2: ref_truth(&c2.guarantees, tr, 0),
        }
    }

    fn joint(&self) -> TruthValue {
        or(
            and(implies(self.a1, self.g1), implies(self.a2, self.g2)),
            and(not(self.a1), not(self.a2)),
        )
    }

    pub fn compose(&self) -> (TruthValue, TruthValue) {
        let a = or(or(and(self.a1, self.a2), and(self.a1, not(self.g1))), and(self.a2, not(self.g2)));
        (a, self.joint())
    }

    /// Assumptions `(A1 and A2) or (A1 and G1) or (A2 and G2)`.
    pub fn compose_unsaturated(&self) -> (TruthValue, TruthValue) {
        let a = or(or(and(self.a1, self.a2), and(self.a1, self.g1)), and(self.a2, self.g2));
        (a, self.joint())
    }

    pub fn conjoin(&self) -> (TruthValue, TruthValue) {
        (or(self.a1, self.a2), self.joint())
    }

    pub fn strong_merge(&self) -> (TruthValue, TruthValue) {
        (and(self.a1, self.a2), or(or(and(self.g1, self.g2), not(self.a1)), not(self.a2)))
    }

    pub fn weak_merge(&self) -> (TruthValue, TruthValue) {
        let a = or(self.a1, self.a2);
        (a, or(or(self.g1, self.g2), not(a)))
    }

    pub fn sat1(&self) -> bool {
        implies(self.a1, self.g1) != False
    }

    pub fn sat2(&self) -> bool {
        implies(self.a2, self.g2) != False
    }
}

pub fn sat((a, g): (TruthValue, TruthValue)) -> bool {
    implies(a, g) != False
}

pub fn built_sat(c: &Contract, tr: &Series) -> bool {
    satisfies(tr, c).unwrap().satisfied()
}

pub fn random_contract(rng: &mut ChaCha8Rng, name: &str) -> Contract {
    Contract::new(name, random_formula(rng, 3), random_formula(rng, 3))
}

/// Boolean combinations of first-step comparisons; always two-valued on a
/// trace with every variable present.
pub fn random_static(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        let op = [CmpOp::Eq, CmpOp::Ne, CmpOp::Le, CmpOp::Gt][rng.random_range(0..4)];
        let v = Expr::var(VARS[rng.random_range(0..VARS.len())]);
        let lhs = if rng.random_bool(0.3) { Expr::bin(BinOp::Add, v, Expr::var(VARS[0])) } else { v };
        return Formula::atom(op, lhs, Expr::num(Num::int(rng.random_range(0..=1))));
    }
    match rng.random_range(0..3) {
        0 => Formula::not(random_static(rng, depth - 1)),
        1 => Formula::and(random_static(rng, depth - 1), random_static(rng, depth - 1)),
        _ => Formula::or(random_static(rng, depth - 1), random_static(rng, depth - 1)),
    }
}

/// Built operators against the raw truth tables on random bit traces, some
/// of which leave operands undefined. Returns the failing cases and the
/// number of cases with an undefined operand.
pub fn operator_failures(cases: u64) -> (Vec<String>, u64) {
    let mut failures = Vec::new();
    let mut undefined = 0;
    for case in 0..cases {
        let mut rng = substream(31, "algebra-oracle", case);
        let (c1, c2) = (random_contract(&mut rng, "c1"), random_contract(&mut rng, "c2"));
        let len = rng.random_range(1..=5);
        let tr = random_bits(&mut rng, len);
        let raw = Raw::of(&c1, &c2, &tr);
        if [raw.a1, raw.g1, raw.a2, raw.g2].contains(&Undefined) {
            undefined += 1;
        }
        let checks = [
            ("compose", built_sat(&op_compose(&c1, &c2), &tr) == sat(raw.compose())),
            ("conjoin", built_sat(&op_conjoin(&c1, &c2), &tr) == sat(raw.conjoin())),
            ("strong merge", built_sat(&op_strong_merge(&c1, &c2), &tr) == sat(raw.strong_merge())),
            ("weak merge", built_sat(&op_weak_merge(&c1, &c2), &tr) == sat(raw.weak_merge())),
            ("compose is both", sat(raw.compose()) == (raw.sat1() && raw.sat2())),
            ("conjoin is both", sat(raw.conjoin()) == (raw.sat1() && raw.sat2())),
        ];
        failures.extend(checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| format!("{name}, case {case}")));
    }
    (failures, undefined)
}

/// Every length-2 trace over three bit variables.
pub fn all_traces() -> Vec<Series> {
    (0..64u32)
        .map(|bits| {
            Series(
                (0..2)
                    .map(|step| {
                        VARS.iter()
                            .enumerate()
                            .map(|(i, v)| (v.to_string(), Num::int(((bits >> (3 * step + i)) & 1) as i64)))
                            .collect()
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Random exact weights summing to one.
pub fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<Num> {
    let raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..=20)).collect();
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&w| Num::ratio(w, total)).collect()
}

pub fn prob(ts: &[Series], w: &[Num], event: impl Fn(&Series) -> bool) -> Num {
    ts.iter().zip(w).filter(|(t, _)| event(t)).fold(Num::zero(), |acc, (_, p)| &acc + p)
}

fn sat_of(c: &Contract) -> impl Fn(&Series) -> bool + '_ {
    move |t| built_sat(c, t)
}

/// Product rules for composition and conjunction, the union bound, and
/// conjunction refining strong merge, on random weightings.
pub fn toy_failures(cases: u64) -> Vec<String> {
    let ts = all_traces();
    let one = Num::int(1);
    let mut failures = Vec::new();
    for case in 0..cases {
        let mut rng = substream(33, "algebra-toy", case);
        let w = weights(&mut rng, ts.len());
        let (c1, c2) = (random_contract(&mut rng, "c1"), random_contract(&mut rng, "c2"));
        let p1 = prob(&ts, &w, sat_of(&c1));
        let p2 = prob(&ts, &w, sat_of(&c2));
        let both = prob(&ts, &w, |t| built_sat(&c1, t) && built_sat(&c2, t));
        let conj = op_conjoin(&c1, &c2);
        let sm = op_strong_merge(&c1, &c2);
        let union = &(&p1 + &p2) - &one;
        let checks = [
            ("composition product", prob(&ts, &w, sat_of(&op_compose(&c1, &c2))) == both),
            ("conjunction product", prob(&ts, &w, sat_of(&conj)) == both),
            ("union bound", union <= both),
            ("strong merge union bound", union <= prob(&ts, &w, sat_of(&sm))),
            ("conjunction refines strong merge", ts.iter().all(|t| !built_sat(&conj, t) || built_sat(&sm, t))),
        ];
        failures.extend(checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| format!("{name}, case {case}")));
    }
    failures
}

/// The mixture inequality for a weak merge whose first assumption is static.
pub fn mixture_failures(cases: u64) -> Vec<String> {
    let ts = all_traces();
    let one = Num::int(1);
    let mut failures = Vec::new();
    for case in 0..cases {
        let mut rng = substream(34, "algebra-mixture", case);
        let w = weights(&mut rng, ts.len());
        let c1 = Contract::new("c1", random_static(&mut rng, 3), random_formula(&mut rng, 3));
        let c2 = random_contract(&mut rng, "c2");
        if ts.iter().any(|t| ref_truth(&c1.assumptions, t, 0) == Undefined) {
            failures.push(format!("undefined static assumption, case {case}"));
            continue;
        }
        let a1 = |t: &Series| ref_truth(&c1.assumptions, t, 0) == True;
        let weight = prob(&ts, &w, a1);
        let in_known = prob(&ts, &w, |t| a1(t) && built_sat(&c1, t));
        let outside = prob(&ts, &w, |t| !a1(t) && built_sat(&c2, t));
        let merged = prob(&ts, &w, sat_of(&op_weak_merge(&c1, &c2)));
        if weight.is_zero() || weight == one {
            if &in_known + &outside > merged {
                failures.push(format!("mixture, case {case}"));
            }
            continue;
        }
        // P(C1 | A1) w + P(C2 | not A1) (1 - w)
        let rest = &one - &weight;
        let cond1 = in_known.checked_div(&weight).unwrap();
        let cond2 = outside.checked_div(&rest).unwrap();
        if &(&cond1 * &weight) + &(&cond2 * &rest) > merged {
            failures.push(format!("mixture, case {case}"));
        }
    }
    failures
}
