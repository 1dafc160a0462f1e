//! Brute-force reference semantics and random inputs shared by the oracle tests.
#![allow(dead_code)]

pub mod ops;

use std::collections::BTreeMap;

use pcv_core::lang::{BinOp, CmpOp, Expr, Formula, Func, TraceView, TruthValue};
use pcv_core::Num;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const VARS: [&str; 3] = ["x", "y", "z"];

/// A trace as a list of variable maps.
#[derive(Debug, Clone)]
pub struct Series(pub Vec<BTreeMap<String, Num>>);

impl TraceView for Series {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn lookup(&self, step: usize, var: &str) -> Option<&Num> {
        self.0.get(step)?.get(var)
    }
}

/// `None` is an undefined value.
pub fn ref_value(e: &Expr, tr: &Series, at: usize) -> Option<Num> {
    match e {
        Expr::Const { value } => Some(value.clone()),
        Expr::Var { path } => tr.0.get(at)?.get(path).cloned(),
        Expr::Next { arg } => ref_value(arg, tr, at + 1),
        Expr::Neg { arg } => ref_value(arg, tr, at).map(|v| -&v),
        Expr::Bin { op, lhs, rhs } => {
            let (l, r) = (ref_value(lhs, tr, at)?, ref_value(rhs, tr, at)?);
            match op {
                BinOp::Add => Some(&l + &r),
                BinOp::Sub => Some(&l - &r),
                BinOp::Mul => Some(&l * &r),
                BinOp::Div => l.checked_div(&r),
            }
        }
        Expr::Call { func, args } => {
            let vals: Option<Vec<Num>> = args.iter().map(|a| ref_value(a, tr, at)).collect();
            let v = vals?;
            Some(match func {
                Func::Min => if v[0] <= v[1] { v[0].clone() } else { v[1].clone() },
                Func::Max => if v[0] >= v[1] { v[0].clone() } else { v[1].clone() },
                Func::Floor => v[0].floor(),
                Func::Ceil => v[0].ceil(),
                Func::Abs => if v[0] < Num::zero() { -&v[0] } else { v[0].clone() },
            })
        }
    }
}

fn t(b: bool) -> TruthValue {
    if b {
        TruthValue::True
    } else {
        TruthValue::False
    }
}

/// Kleene connectives, written out as truth tables.
fn kleene_not(a: TruthValue) -> TruthValue {
    match a {
        TruthValue::True => TruthValue::False,
        TruthValue::False => TruthValue::True,
        TruthValue::Undefined => TruthValue::Undefined,
    }
}

fn kleene_and(a: TruthValue, b: TruthValue) -> TruthValue {
    if a == TruthValue::False || b == TruthValue::False {
        TruthValue::False
    } else if a == TruthValue::True && b == TruthValue::True {
        TruthValue::True
    } else {
        TruthValue::Undefined
    }
}

fn kleene_or(a: TruthValue, b: TruthValue) -> TruthValue {
    kleene_not(kleene_and(kleene_not(a), kleene_not(b)))
}

/// Truth of `f` at position `i`, by quantifying over positions directly.
pub fn ref_truth(f: &Formula, tr: &Series, i: usize) -> TruthValue {
    let n = tr.0.len();
    match f {
        Formula::Bool { value } => t(*value),
        Formula::Atom { op, lhs, rhs } => match (ref_value(lhs, tr, i), ref_value(rhs, tr, i)) {
            (Some(l), Some(r)) => t(match op {
                CmpOp::Le => l <= r,
                CmpOp::Lt => l < r,
                CmpOp::Ge => l >= r,
                CmpOp::Gt => l > r,
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
            }),
            _ => TruthValue::Undefined,
        },
        Formula::Not { arg } => kleene_not(ref_truth(arg, tr, i)),
        Formula::And { lhs, rhs } => kleene_and(ref_truth(lhs, tr, i), ref_truth(rhs, tr, i)),
        Formula::Or { lhs, rhs } => kleene_or(ref_truth(lhs, tr, i), ref_truth(rhs, tr, i)),
        Formula::Implies { lhs, rhs } => kleene_or(kleene_not(ref_truth(lhs, tr, i)), ref_truth(rhs, tr, i)),
        Formula::Iff { lhs, rhs } => {
            let (a, b) = (ref_truth(lhs, tr, i), ref_truth(rhs, tr, i));
            if a == TruthValue::Undefined || b == TruthValue::Undefined {
                TruthValue::Undefined
            } else {
                t(a == b)
            }
        }
        Formula::Next { arg } => {
            if i + 1 < n {
                ref_truth(arg, tr, i + 1)
            } else {
                TruthValue::False
            }
        }
        Formula::Always { arg } => t(!(i..n).any(|j| ref_truth(arg, tr, j) == TruthValue::False)),
        Formula::Eventually { arg } => t((i..n).any(|j| ref_truth(arg, tr, j) == TruthValue::True)),
        Formula::Until { lhs, rhs } => t((i..n).any(|j| {
            ref_truth(rhs, tr, j) == TruthValue::True && (i..j).all(|k| ref_truth(lhs, tr, k) != TruthValue::False)
        })),
    }
}

/// Positions where the evaluator disagrees with [`ref_truth`] over `cases`
/// random formulas of depth 5 on traces of length at most 8.
pub fn evaluator_mismatches(cases: u64) -> Vec<(u64, usize)> {
    let mut mismatches = Vec::new();
    for case in 0..cases {
        let mut rng = pcv_core::trace::substream(2024, "lang-oracle", case);
        let f = random_formula(&mut rng, 5);
        let tr = random_series(&mut rng, 8);
        for (i, v) in pcv_core::lang::eval_all(&f, &tr).iter().enumerate() {
            if *v != ref_truth(&f, &tr, i) {
                mismatches.push((case, i));
            }
        }
    }
    mismatches
}

/// Satisfaction of `A => G` at the first position.
pub fn ref_satisfies(a: &Formula, g: &Formula, tr: &Series) -> bool {
    kleene_or(kleene_not(ref_truth(a, tr, 0)), ref_truth(g, tr, 0)) == TruthValue::True
}

pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.35) {
        return if rng.random_bool(0.6) {
            Expr::var(VARS[rng.random_range(0..VARS.len())])
        } else {
            Expr::num(Num::milli(rng.random_range(-4..=4) * 500))
        };
    }
    match rng.random_range(0..5) {
        0 => Expr::neg(random_expr(rng, depth - 1)),
        1 => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][rng.random_range(0..4)];
            Expr::bin(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))
        }
        2 => Expr::call(
            [Func::Min, Func::Max][rng.random_range(0..2)],
            vec![random_expr(rng, depth - 1), random_expr(rng, depth - 1)],
        ),
        3 => Expr::call([Func::Floor, Func::Ceil, Func::Abs][rng.random_range(0..3)], vec![random_expr(rng, depth - 1)]),
        _ => Expr::next(random_expr(rng, depth - 1)),
    }
}

/// A formula of nesting depth at most `depth`.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.1) {
            Formula::Bool { value: rng.random_bool(0.5) }
        } else {
            let op = [CmpOp::Le, CmpOp::Lt, CmpOp::Ge, CmpOp::Gt, CmpOp::Eq, CmpOp::Ne][rng.random_range(0..6)];
            Formula::atom(op, random_expr(rng, 2), random_expr(rng, 1))
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, depth - 1);
    match rng.random_range(0..10) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::iff(sub(rng), sub(rng)),
        5 => Formula::next(sub(rng)),
        6 => Formula::always(sub(rng)),
        7 => Formula::eventually(sub(rng)),
        _ => Formula::until(sub(rng), sub(rng)),
    }
}

/// A trace of 1..=max_len steps over [`VARS`]; about one value in twenty is
/// missing.
pub fn random_series(rng: &mut ChaCha8Rng, max_len: usize) -> Series {
    let len = rng.random_range(1..=max_len);
    Series(
        (0..len)
            .map(|_| {
                let mut step = BTreeMap::new();
                for v in VARS {
                    let value = Num::milli(rng.random_range(-3..=3) * 500);
                    if !rng.random_bool(0.05) {
                        step.insert(v.to_string(), value);
                    }
                }
                step
            })
            .collect(),
    )
}

/// A trace with every variable present, boolean-ish values in {0, 1}.
pub fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Series {
    Series(
        (0..len)
            .map(|_| VARS.iter().map(|v| (v.to_string(), Num::int(rng.random_range(0..=1)))).collect())
            .collect(),
    )
}
