//! Local, semantics-preserving rewrites applied bottom-up.

use super::ast::Formula;

pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::Bool { .. } | Formula::Atom { .. } => f.clone(),
        Formula::Not { arg } => match simplify(arg) {
            Formula::Bool { value } => Formula::Bool { value: !value },
            Formula::Not { arg } => *arg,
            other => Formula::not(other),
        },
        Formula::And { lhs, rhs } => match (simplify(lhs), simplify(rhs)) {
            (Formula::Bool { value: true }, x) | (x, Formula::Bool { value: true }) => x,
            (Formula::Bool { value: false }, _) | (_, Formula::Bool { value: false }) => Formula::FALSE,
            (l, r) => Formula::and(l, r),
        },
        Formula::Or { lhs, rhs } => match (simplify(lhs), simplify(rhs)) {
            (Formula::Bool { value: false }, x) | (x, Formula::Bool { value: false }) => x,
            (Formula::Bool { value: true }, _) | (_, Formula::Bool { value: true }) => Formula::TRUE,
            (l, r) => Formula::or(l, r),
        },
        Formula::Implies { lhs, rhs } => match (simplify(lhs), simplify(rhs)) {
            (Formula::Bool { value: true }, x) => x,
            (Formula::Bool { value: false }, _) | (_, Formula::Bool { value: true }) => Formula::TRUE,
            (x, Formula::Bool { value: false }) => simplify(&Formula::not(x)),
            (l, r) => Formula::implies(l, r),
        },
        Formula::Iff { lhs, rhs } => match (simplify(lhs), simplify(rhs)) {
            (Formula::Bool { value: true }, x) | (x, Formula::Bool { value: true }) => x,
            (Formula::Bool { value: false }, x) | (x, Formula::Bool { value: false }) => simplify(&Formula::not(x)),
            (l, r) => Formula::iff(l, r),
        },
        Formula::Next { arg } => match simplify(arg) {
            Formula::Bool { value: false } => Formula::FALSE,
            other => Formula::next(other),
        },
        Formula::Always { arg } => match simplify(arg) {
            b @ Formula::Bool { .. } => b,
            other => Formula::always(other),
        },
        Formula::Eventually { arg } => match simplify(arg) {
            b @ Formula::Bool { .. } => b,
            other => Formula::eventually(other),
        },
        Formula::Until { lhs, rhs } => match (simplify(lhs), simplify(rhs)) {
            (_, Formula::Bool { value: true }) => Formula::TRUE,
            (_, Formula::Bool { value: false }) => Formula::FALSE,
            (l, r) => Formula::until(l, r),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_formula;

    fn s(text: &str) -> String {
        simplify(&parse_formula(text).unwrap()).to_string()
    }

    #[test]
    fn identity_and_annihilator() {
        assert_eq!(s("true and (x > 1)"), "(x) > (1)");
        assert_eq!(s("(x > 1) or true"), "true");
        assert_eq!(s("false or (x > 1)"), "(x) > (1)");
        assert_eq!(s("(x > 1) and false"), "false");
    }

    #[test]
    fn negations_and_implications() {
        assert_eq!(s("not (not (x > 1))"), "(x) > (1)");
        assert_eq!(s("true implies (x > 1)"), "(x) > (1)");
        assert_eq!(s("false implies (x > 1)"), "true");
        assert_eq!(s("(x > 1) implies false"), "not ((x) > (1))");
    }

    #[test]
    fn merge_shape_collapses() {
        assert_eq!(s("((true and true) or (true and (g > 0))) or (true and (h > 0))"), "true");
    }

    #[test]
    fn temporal_constants() {
        assert_eq!(s("always (true)"), "true");
        assert_eq!(s("eventually (true)"), "true");
        assert_eq!(s("(x > 1) until false"), "false");
    }
}
