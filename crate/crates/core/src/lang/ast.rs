use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::num::Num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Func {
    Min,
    Max,
    Floor,
    Ceil,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Floor => "floor",
            Func::Ceil => "ceil",
            Func::Abs => "abs",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            Func::Floor | Func::Ceil | Func::Abs => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "min" => Func::Min,
            "max" => Func::Max,
            "floor" => Func::Floor,
            "ceil" => Func::Ceil,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, lhs: &Num, rhs: &Num) -> bool {
        match self {
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

/// Arithmetic over trace variables. `Next` shifts evaluation one step forward.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Const { value: Num },
    Var { path: String },
    Neg { arg: Box<Expr> },
    Bin { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { func: Func, args: Vec<Expr> },
    Next { arg: Box<Expr> },
}

impl Expr {
    pub fn num(value: Num) -> Expr {
        Expr::Const { value }
    }

    pub fn var(path: impl Into<String>) -> Expr {
        Expr::Var { path: path.into() }
    }

    pub fn neg(arg: Expr) -> Expr {
        Expr::Neg { arg: Box::new(arg) }
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn call(func: Func, args: Vec<Expr>) -> Expr {
        Expr::Call { func, args }
    }

    pub fn next(arg: Expr) -> Expr {
        Expr::Next { arg: Box::new(arg) }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const { .. } => {}
            Expr::Var { path } => {
                out.insert(path.clone());
            }
            Expr::Neg { arg } | Expr::Next { arg } => arg.collect_vars(out),
            Expr::Bin { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn has_next(&self) -> bool {
        match self {
            Expr::Const { .. } | Expr::Var { .. } => false,
            Expr::Next { .. } => true,
            Expr::Neg { arg } => arg.has_next(),
            Expr::Bin { lhs, rhs, .. } => lhs.has_next() || rhs.has_next(),
            Expr::Call { args, .. } => args.iter().any(Expr::has_next),
        }
    }
}

/// Finite-trace temporal formula. Atoms carry no temporal structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Formula {
    Bool { value: bool },
    Atom { op: CmpOp, lhs: Expr, rhs: Expr },
    Not { arg: Box<Formula> },
    And { lhs: Box<Formula>, rhs: Box<Formula> },
    Or { lhs: Box<Formula>, rhs: Box<Formula> },
    Implies { lhs: Box<Formula>, rhs: Box<Formula> },
    Iff { lhs: Box<Formula>, rhs: Box<Formula> },
    Next { arg: Box<Formula> },
    Always { arg: Box<Formula> },
    Eventually { arg: Box<Formula> },
    Until { lhs: Box<Formula>, rhs: Box<Formula> },
}

impl Formula {
    pub const TRUE: Formula = Formula::Bool { value: true };
    pub const FALSE: Formula = Formula::Bool { value: false };

    pub fn atom(op: CmpOp, lhs: Expr, rhs: Expr) -> Formula {
        Formula::Atom { op, lhs, rhs }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Formula) -> Formula {
        Formula::Not { arg: Box::new(arg) }
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Iff { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn next(arg: Formula) -> Formula {
        Formula::Next { arg: Box::new(arg) }
    }

    pub fn always(arg: Formula) -> Formula {
        Formula::Always { arg: Box::new(arg) }
    }

    pub fn eventually(arg: Formula) -> Formula {
        Formula::Eventually { arg: Box::new(arg) }
    }

    pub fn until(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Until { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bool { .. } => {}
            Formula::Atom { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Formula::Not { arg } | Formula::Next { arg } | Formula::Always { arg } | Formula::Eventually { arg } => {
                arg.collect_vars(out)
            }
            Formula::And { lhs, rhs }
            | Formula::Or { lhs, rhs }
            | Formula::Implies { lhs, rhs }
            | Formula::Iff { lhs, rhs }
            | Formula::Until { lhs, rhs } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    /// True when any atom uses a value-level `next`.
    pub fn has_value_next(&self) -> bool {
        match self {
            Formula::Bool { .. } => false,
            Formula::Atom { lhs, rhs, .. } => lhs.has_next() || rhs.has_next(),
            Formula::Not { arg } | Formula::Next { arg } | Formula::Always { arg } | Formula::Eventually { arg } => {
                arg.has_value_next()
            }
            Formula::And { lhs, rhs }
            | Formula::Or { lhs, rhs }
            | Formula::Implies { lhs, rhs }
            | Formula::Iff { lhs, rhs }
            | Formula::Until { lhs, rhs } => lhs.has_value_next() || rhs.has_value_next(),
        }
    }

    pub fn has_temporal_next(&self) -> bool {
        match self {
            Formula::Bool { .. } | Formula::Atom { .. } => false,
            Formula::Next { .. } => true,
            Formula::Not { arg } | Formula::Always { arg } | Formula::Eventually { arg } => arg.has_temporal_next(),
            Formula::And { lhs, rhs }
            | Formula::Or { lhs, rhs }
            | Formula::Implies { lhs, rhs }
            | Formula::Iff { lhs, rhs }
            | Formula::Until { lhs, rhs } => lhs.has_temporal_next() || rhs.has_temporal_next(),
        }
    }

    /// Splits a left- or right-nested chain of `And` into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And { lhs, rhs } => {
                    walk(lhs, out);
                    walk(rhs, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Rebuilds a left-nested conjunction; empty input yields `true`.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut iter = parts.into_iter();
        match iter.next() {
            None => Formula::TRUE,
            Some(first) => iter.fold(first, Formula::and),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Bool { .. } | Formula::Atom { .. } => 1,
            Formula::Not { arg } | Formula::Next { arg } | Formula::Always { arg } | Formula::Eventually { arg } => {
                1 + arg.size()
            }
            Formula::And { lhs, rhs }
            | Formula::Or { lhs, rhs }
            | Formula::Implies { lhs, rhs }
            | Formula::Iff { lhs, rhs }
            | Formula::Until { lhs, rhs } => 1 + lhs.size() + rhs.size(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render_expr(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render_formula(self))
    }
}
