//! The contract property language: AST, concrete syntax, evaluation.

mod ast;
mod eval;
mod parser;
mod render;
mod simplify;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use ast::{BinOp, CmpOp, Expr, Formula, Func};
pub use eval::{eval_all, eval_expr, eval_formula, holds, ExprValue, TraceView, TruthValue, Undef};
pub use parser::{parse_expr, parse_formula, ParseError};
pub use render::{render_expr, render_formula, render_num};
pub use simplify::simplify;

/// An assume-guarantee pair over named trace variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub name: String,
    pub assumptions: Formula,
    pub guarantees: Formula,
    pub signature: BTreeSet<String>,
}

impl Contract {
    /// Builds a contract whose signature is exactly the variables it reads.
    pub fn new(name: impl Into<String>, assumptions: Formula, guarantees: Formula) -> Self {
        let mut signature = assumptions.vars();
        guarantees.collect_vars(&mut signature);
        Contract { name: name.into(), assumptions, guarantees, signature }
    }

    pub fn parse(name: impl Into<String>, assumptions: &str, guarantees: &str) -> Result<Self, ParseError> {
        Ok(Contract::new(name, parse_formula(assumptions)?, parse_formula(guarantees)?))
    }

    /// Extends the signature with variables the formulas do not mention.
    pub fn with_signature(mut self, extra: impl IntoIterator<Item = String>) -> Self {
        self.signature.extend(extra);
        self
    }

    /// The single formula `A implies G` a trace must satisfy.
    pub fn implication(&self) -> Formula {
        Formula::implies(self.assumptions.clone(), self.guarantees.clone())
    }

    /// Stable identity of the contract's semantics (name excluded).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(render_formula(&self.assumptions).as_bytes());
        h.update(b"\n=>\n");
        h.update(render_formula(&self.guarantees).as_bytes());
        hex::encode(h.finalize())
    }

    pub fn simplified(&self) -> Contract {
        Contract {
            name: self.name.clone(),
            assumptions: simplify(&self.assumptions),
            guarantees: simplify(&self.guarantees),
            signature: self.signature.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Verified,
    AViolated,
    GViolated,
}

impl Verdict {
    /// Whether the trace counts toward the satisfaction count.
    pub fn satisfied(self) -> bool {
        !matches!(self, Verdict::GViolated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatisfyError {
    #[error("trace is missing variable `{0}` required by contract")]
    MissingVariable(String),
    #[error("cannot evaluate a contract on an empty trace")]
    EmptyTrace,
}

/// Classifies a trace against a contract.
pub fn satisfies(trace: &dyn TraceView, contract: &Contract) -> Result<Verdict, SatisfyError> {
    if trace.is_empty() {
        return Err(SatisfyError::EmptyTrace);
    }
    for var in &contract.signature {
        if trace.lookup(0, var).is_none() {
            return Err(SatisfyError::MissingVariable(var.clone()));
        }
    }
    Ok(match eval_formula(&contract.assumptions, trace, 0) {
        TruthValue::False => Verdict::AViolated,
        _ => match (eval_formula(&contract.assumptions, trace, 0), eval_formula(&contract.guarantees, trace, 0)) {
            (TruthValue::True, TruthValue::False) => Verdict::GViolated,
            _ => Verdict::Verified,
        },
    })
}

/// True when `f` reads only scene variables, with no value-level or temporal
/// `next`, so that its value is fixed by the initial state.
pub fn statically_decidable(f: &Formula, scene_vars: &BTreeSet<String>) -> bool {
    !f.has_value_next() && !f.has_temporal_next() && f.vars().iter().all(|v| scene_vars.contains(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_decidability() {
        let scene: BTreeSet<String> = ["params['lead_car_width']".to_string()].into();
        assert!(statically_decidable(&parse_formula("(params['lead_car_width']) >= (1.8)").unwrap(), &scene));
        assert!(!statically_decidable(&parse_formula("always ((lead_dist) > (5))").unwrap(), &scene));
        assert!(statically_decidable(&Formula::TRUE, &BTreeSet::new()));
        assert!(!statically_decidable(&parse_formula("next ((params['lead_car_width']) >= (1.8))").unwrap(), &scene));
    }

    #[test]
    fn contract_hash_ignores_name() {
        let a = Contract::parse("a", "true", "always (x > 0)").unwrap();
        let b = Contract::parse("b", "true", "always (x > 0)").unwrap();
        let c = Contract::parse("c", "true", "always (x >= 0)").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.signature, ["x".to_string()].into());
    }
}
