//! Three-valued finite-trace evaluation.
//!
//! Formulas are evaluated bottom-up over all positions at once: every subformula
//! produces a truth vector, and temporal operators are single backward scans.

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, Expr, Formula, Func};
use crate::num::Num;

/// Read access to a finite trace of variable valuations.
pub trait TraceView {
    fn len(&self) -> usize;
    fn lookup(&self, step: usize, var: &str) -> Option<&Num>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TruthValue {
    True,
    False,
    Undefined,
}

impl TruthValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }

    pub fn not(self) -> Self {
        match self {
            TruthValue::True => TruthValue::False,
            TruthValue::False => TruthValue::True,
            TruthValue::Undefined => TruthValue::Undefined,
        }
    }

    pub fn and(self, other: Self) -> Self {
        use TruthValue::*;
        match (self, other) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Undefined,
        }
    }

    pub fn or(self, other: Self) -> Self {
        use TruthValue::*;
        match (self, other) {
            (True, _) | (_, True) => True,
            (False, False) => False,
            _ => Undefined,
        }
    }

    pub fn implies(self, other: Self) -> Self {
        self.not().or(other)
    }

    pub fn iff(self, other: Self) -> Self {
        use TruthValue::*;
        match (self, other) {
            (Undefined, _) | (_, Undefined) => Undefined,
            (a, b) => TruthValue::from_bool(a == b),
        }
    }
}

/// Why an expression has no value at a position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Undef {
    /// A `next` shift reached past the end of the trace.
    OutOfRange,
    MissingVar(String),
    DivByZero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprValue {
    Num(Num),
    Undefined(Undef),
}

impl ExprValue {
    pub fn as_num(&self) -> Option<&Num> {
        match self {
            ExprValue::Num(n) => Some(n),
            ExprValue::Undefined(_) => None,
        }
    }
}

/// Value of `e` at step `t`. Out-of-range shifts, absent variables and division
/// by zero yield `Undefined` with the cause.
pub fn eval_expr(e: &Expr, trace: &dyn TraceView, t: usize) -> ExprValue {
    eval_shifted(e, trace, t, 0)
}

fn eval_shifted(e: &Expr, trace: &dyn TraceView, t: usize, shift: usize) -> ExprValue {
    use ExprValue::{Num as V, Undefined as U};
    match e {
        Expr::Const { value } => V(value.clone()),
        Expr::Var { path } => {
            let at = t + shift;
            if at >= trace.len() {
                return U(Undef::OutOfRange);
            }
            match trace.lookup(at, path) {
                Some(v) => V(v.clone()),
                None => U(Undef::MissingVar(path.clone())),
            }
        }
        Expr::Next { arg } => eval_shifted(arg, trace, t, shift + 1),
        Expr::Neg { arg } => match eval_shifted(arg, trace, t, shift) {
            V(v) => V(-&v),
            u => u,
        },
        Expr::Bin { op, lhs, rhs } => {
            let l = eval_shifted(lhs, trace, t, shift);
            let r = eval_shifted(rhs, trace, t, shift);
            match (l, r) {
                (V(l), V(r)) => apply_bin(*op, &l, &r),
                (U(u), _) | (_, U(u)) => U(u),
            }
        }
        Expr::Call { func, args } => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match eval_shifted(a, trace, t, shift) {
                    V(v) => vals.push(v),
                    u => return u,
                }
            }
            V(apply_func(*func, &vals))
        }
    }
}

fn apply_bin(op: BinOp, l: &Num, r: &Num) -> ExprValue {
    match op {
        BinOp::Add => ExprValue::Num(l + r),
        BinOp::Sub => ExprValue::Num(l - r),
        BinOp::Mul => ExprValue::Num(l * r),
        BinOp::Div => match l.checked_div(r) {
            Some(v) => ExprValue::Num(v),
            None => ExprValue::Undefined(Undef::DivByZero),
        },
    }
}

fn apply_func(func: Func, args: &[Num]) -> Num {
    match func {
        Func::Min => args[0].clone().min(args[1].clone()),
        Func::Max => args[0].clone().max(args[1].clone()),
        Func::Floor => args[0].floor(),
        Func::Ceil => args[0].ceil(),
        Func::Abs => args[0].abs(),
    }
}

/// Truth value of `f` at step `t`.
///
/// Strong `Next`: false at the last position. `Always` treats undefined
/// positions as vacuously satisfied; `Eventually` needs a position that is
/// definitely true. `a until b` holds if `b` is true at some `j >= t` and `a` is
/// not false on `t..j`.
pub fn eval_formula(f: &Formula, trace: &dyn TraceView, t: usize) -> TruthValue {
    assert!(t < trace.len(), "position {t} outside trace of length {}", trace.len());
    eval_all(f, trace)[t]
}

/// Truth vector of `f` over every position of the trace.
pub fn eval_all(f: &Formula, trace: &dyn TraceView) -> Vec<TruthValue> {
    use TruthValue::*;
    let n = trace.len();
    match f {
        Formula::Bool { value } => vec![TruthValue::from_bool(*value); n],
        Formula::Atom { op, lhs, rhs } => (0..n)
            .map(|t| match (eval_expr(lhs, trace, t), eval_expr(rhs, trace, t)) {
                (ExprValue::Num(l), ExprValue::Num(r)) => TruthValue::from_bool(op.holds(&l, &r)),
                _ => Undefined,
            })
            .collect(),
        Formula::Not { arg } => eval_all(arg, trace).into_iter().map(TruthValue::not).collect(),
        Formula::And { lhs, rhs } => zip(lhs, rhs, trace, TruthValue::and),
        Formula::Or { lhs, rhs } => zip(lhs, rhs, trace, TruthValue::or),
        Formula::Implies { lhs, rhs } => zip(lhs, rhs, trace, TruthValue::implies),
        Formula::Iff { lhs, rhs } => zip(lhs, rhs, trace, TruthValue::iff),
        Formula::Next { arg } => {
            let inner = eval_all(arg, trace);
            (0..n).map(|t| if t + 1 < n { inner[t + 1] } else { False }).collect()
        }
        Formula::Always { arg } => {
            let inner = eval_all(arg, trace);
            let mut out = vec![True; n];
            let mut acc = True;
            for t in (0..n).rev() {
                if inner[t] == False {
                    acc = False;
                }
                out[t] = acc;
            }
            out
        }
        Formula::Eventually { arg } => {
            let inner = eval_all(arg, trace);
            let mut out = vec![False; n];
            let mut acc = False;
            for t in (0..n).rev() {
                if inner[t] == True {
                    acc = True;
                }
                out[t] = acc;
            }
            out
        }
        Formula::Until { lhs, rhs } => {
            let a = eval_all(lhs, trace);
            let b = eval_all(rhs, trace);
            let mut out = vec![False; n];
            let mut acc = False;
            for t in (0..n).rev() {
                acc = if b[t] == True {
                    True
                } else if a[t] != False {
                    acc
                } else {
                    False
                };
                out[t] = acc;
            }
            out
        }
    }
}

fn zip(
    lhs: &Formula,
    rhs: &Formula,
    trace: &dyn TraceView,
    op: fn(TruthValue, TruthValue) -> TruthValue,
) -> Vec<TruthValue> {
    let l = eval_all(lhs, trace);
    let r = eval_all(rhs, trace);
    l.into_iter().zip(r).map(|(a, b)| op(a, b)).collect()
}

/// Top-level satisfaction: the formula must be definitely true at step 0.
pub fn holds(f: &Formula, trace: &dyn TraceView) -> bool {
    !trace.is_empty() && eval_formula(f, trace, 0) == TruthValue::True
}
