//! Fully parenthesized concrete syntax. Every operand is wrapped so that
//! `parse(render(f)) == f` without any precedence reasoning.

use super::ast::{Expr, Formula};
use crate::num::Num;

pub fn render_num(n: &Num) -> String {
    if n.0 < num_rational::BigRational::from_integer(0.into()) {
        return format!("-({})", render_num(&-n));
    }
    match n.to_decimal() {
        Some(d) => d,
        None => format!("({}) / ({})", n.0.numer(), n.0.denom()),
    }
}

pub fn render_expr(e: &Expr) -> String {
    match e {
        Expr::Const { value } => render_num(value),
        Expr::Var { path } => path.clone(),
        Expr::Neg { arg } => format!("-({})", render_expr(arg)),
        Expr::Bin { op, lhs, rhs } => format!("({}) {} ({})", render_expr(lhs), op.symbol(), render_expr(rhs)),
        Expr::Call { func, args } => {
            let args: Vec<String> = args.iter().map(|a| format!("({})", render_expr(a))).collect();
            format!("{}({})", func.name(), args.join(", "))
        }
        Expr::Next { arg } => format!("next ({})", render_expr(arg)),
    }
}

pub fn render_formula(f: &Formula) -> String {
    let binary = |kw: &str, l: &Formula, r: &Formula| format!("({}) {kw} ({})", render_formula(l), render_formula(r));
    match f {
        Formula::Bool { value } => if *value { "true" } else { "false" }.to_string(),
        Formula::Atom { op, lhs, rhs } => format!("({}) {} ({})", render_expr(lhs), op.symbol(), render_expr(rhs)),
        Formula::Not { arg } => format!("not ({})", render_formula(arg)),
        Formula::And { lhs, rhs } => binary("and", lhs, rhs),
        Formula::Or { lhs, rhs } => binary("or", lhs, rhs),
        Formula::Implies { lhs, rhs } => binary("implies", lhs, rhs),
        Formula::Iff { lhs, rhs } => binary("iff", lhs, rhs),
        Formula::Until { lhs, rhs } => binary("until", lhs, rhs),
        Formula::Next { arg } => format!("next ({})", render_formula(arg)),
        Formula::Always { arg } => format!("always ({})", render_formula(arg)),
        Formula::Eventually { arg } => format!("eventually ({})", render_formula(arg)),
    }
}
