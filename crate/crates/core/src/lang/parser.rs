//! Lexer and backtracking recursive-descent parser for the contract language.
//!
//! `next` is value-level when it prefixes an expression inside a comparison and
//! temporal otherwise. At each `next` (and each `(`) the parser first tries to
//! read a comparison and falls back to the formula reading.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::{BinOp, CmpOp, Expr, Formula, Func};
use crate::num::Num;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub found: String,
    pub expected: BTreeSet<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let expected: Vec<&str> = self.expected.iter().map(String::as_str).collect();
        write!(
            f,
            "syntax error at line {}, column {}: found {}, expected one of {{{}}}",
            self.line,
            self.col,
            self.found,
            expected.join(", ")
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Num),
    Path(String),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Path(p) => format!("identifier `{p}`"),
            Tok::Kw(k) => format!("`{k}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "true", "false", "not", "and", "or", "implies", "iff", "until", "next", "always", "eventually",
];

const SYMBOLS: &[&str] = &["<=", ">=", "==", "!=", "<", ">", "(", ")", ",", "+", "-", "*", "/"];

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, found: String, expected: &[&str]| ParseError {
        line,
        col,
        found,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() || c == '\\' {
            i += 1;
            col += 1;
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = Num::from_decimal(&text)
                .ok_or_else(|| err(start_line, start_col, format!("`{text}`"), &["number"]))?;
            out.push(Spanned { tok: Tok::Num(n), line: start_line, col: start_col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            let ident = |i: &mut usize| {
                while *i < chars.len() && (chars[*i].is_alphanumeric() || chars[*i] == '_') {
                    *i += 1;
                }
            };
            ident(&mut i);
            while i + 1 < chars.len() && chars[i] == '.' && (chars[i + 1].is_alphabetic() || chars[i + 1] == '_') {
                i += 1;
                ident(&mut i);
            }
            if i < chars.len() && chars[i] == '[' {
                // subscript with a quoted key: params['weather']
                let quote = chars.get(i + 1).copied();
                if !matches!(quote, Some('\'') | Some('"')) {
                    return Err(err(line, col + (i - start) + 1, "`[`".into(), &["quoted key"]));
                }
                let quote = quote.unwrap();
                let mut j = i + 2;
                while j < chars.len() && chars[j] != quote {
                    j += 1;
                }
                if j + 1 >= chars.len() || chars[j + 1] != ']' {
                    return Err(err(line, col + (j - start), "unterminated subscript".into(), &["`']`"]));
                }
                i = j + 2;
            }
            let text: String = chars[start..i].iter().collect::<String>().replace('"', "'");
            col += i - start;
            let tok = match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => Tok::Kw(k),
                None => Tok::Path(text),
            };
            out.push(Spanned { tok, line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Spanned { tok: Tok::Sym(sym), line: start_line, col: start_col });
            }
            None => return Err(err(line, col, format!("`{c}`"), &["expression", "formula"])),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Furthest failure seen, for error reporting after backtracking.
    furthest: Option<(usize, BTreeSet<String>)>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn fail<T>(&mut self, expected: &[&str]) -> PResult<T> {
        let here = self.pos;
        match &mut self.furthest {
            Some((at, set)) if *at == here => set.extend(expected.iter().map(|s| s.to_string())),
            Some((at, _)) if *at > here => {}
            _ => self.furthest = Some((here, expected.iter().map(|s| s.to_string()).collect())),
        }
        Err(())
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Kw(k) if *k == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &'static str) -> PResult<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            let label = format!("`{sym}`");
            self.fail(&[label.as_str()])
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.implication()?;
        while self.eat_kw("iff") {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_kw("implies") {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat_kw("or") {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.until()?;
        while self.eat_kw("and") {
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> PResult<Formula> {
        let lhs = self.unary()?;
        if self.eat_kw("until") {
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_kw("not") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat_kw("always") {
            return Ok(Formula::always(self.unary()?));
        }
        if self.eat_kw("eventually") {
            return Ok(Formula::eventually(self.unary()?));
        }
        if matches!(self.peek(), Tok::Kw("next")) {
            let save = self.pos;
            if let Ok(atom) = self.comparison() {
                return Ok(atom);
            }
            self.pos = save + 1;
            return Ok(Formula::next(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat_kw("true") {
            return Ok(Formula::TRUE);
        }
        if self.eat_kw("false") {
            return Ok(Formula::FALSE);
        }
        let save = self.pos;
        if let Ok(atom) = self.comparison() {
            return Ok(atom);
        }
        self.pos = save;
        if self.eat_sym("(") {
            let inner = self.formula()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        self.fail(&["formula"])
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            _ => return self.fail(&["comparison operator"]),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Formula::atom(op, lhs, rhs))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::neg(self.factor()?));
        }
        if self.eat_kw("next") {
            return Ok(Expr::next(self.factor()?));
        }
        match self.peek().clone() {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::num(n))
            }
            Tok::Path(p) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&p) {
                    if self.eat_sym("(") {
                        let mut args = vec![self.expr()?];
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                        self.expect_sym(")")?;
                        if args.len() != func.arity() {
                            self.pos -= 1;
                            let label = format!("{} argument(s) to {}", func.arity(), func.name());
                            return self.fail(&[label.as_str()]);
                        }
                        return Ok(Expr::call(func, args));
                    }
                }
                Ok(Expr::var(p))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            _ => self.fail(&["expression"]),
        }
    }

    fn error(&self) -> ParseError {
        let (at, expected) = self.furthest.clone().unwrap_or_else(|| (self.pos, BTreeSet::new()));
        let at = at.min(self.toks.len() - 1);
        let tok = &self.toks[at];
        ParseError { line: tok.line, col: tok.col, found: tok.tok.describe(), expected }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0, furthest: None };
    match parser.formula() {
        Ok(f) if parser.peek() == &Tok::Eof => Ok(f),
        Ok(_) => {
            let _ = parser.fail::<()>(&["`and`", "`or`", "`implies`", "`iff`", "`until`", "end of input"]);
            Err(parser.error())
        }
        Err(()) => Err(parser.error()),
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0, furthest: None };
    match parser.expr() {
        Ok(e) if parser.peek() == &Tok::Eof => Ok(e),
        Ok(_) => {
            let _ = parser.fail::<()>(&["operator", "end of input"]);
            Err(parser.error())
        }
        Err(()) => Err(parser.error()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(p: &str) -> Expr {
        Expr::var(p)
    }

    #[test]
    fn fully_parenthesized_always() {
        let f = parse_formula("always ((lead_dist) > (5))").unwrap();
        assert_eq!(f, Formula::always(Formula::atom(CmpOp::Gt, var("lead_dist"), Expr::num(Num::int(5)))));
    }

    #[test]
    fn literal_true() {
        assert_eq!(parse_formula("true").unwrap(), Formula::TRUE);
    }

    #[test]
    fn value_level_next() {
        let f = parse_formula("always (self.speed <= (next self.speed))").unwrap();
        assert_eq!(f, Formula::always(Formula::atom(CmpOp::Le, var("self.speed"), Expr::next(var("self.speed")))));
    }

    #[test]
    fn temporal_next_when_body_is_formula() {
        let f = parse_formula("next ((x) > (5))").unwrap();
        assert_eq!(f, Formula::next(Formula::atom(CmpOp::Gt, var("x"), Expr::num(Num::int(5)))));
        let g = parse_formula("next x > 5").unwrap();
        assert!(matches!(g, Formula::Atom { .. }));
        assert_eq!(parse_formula("next (true)").unwrap(), Formula::next(Formula::TRUE));
    }

    #[test]
    fn scene_parameter_paths() {
        let f = parse_formula("(params['lead_car_width']) >= (1.8)").unwrap();
        assert_eq!(f, Formula::atom(CmpOp::Ge, var("params['lead_car_width']"), Expr::num(Num::ratio(9, 5))));
        let g = parse_formula("params[\"weather\"] == 1").unwrap();
        assert!(g.vars().contains("params['weather']"));
    }

    #[test]
    fn negated_literal_and_functions() {
        let f = parse_formula("(-(0.9)) <= (min((a), (abs(b))))").unwrap();
        let expected = Formula::atom(
            CmpOp::Le,
            Expr::neg(Expr::num(Num::ratio(9, 10))),
            Expr::call(Func::Min, vec![var("a"), Expr::call(Func::Abs, vec![var("b")])]),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn precedence_without_parens() {
        let f = parse_formula("a > 1 and b > 2 or c > 3 implies d > 4").unwrap();
        match f {
            Formula::Implies { lhs, .. } => assert!(matches!(*lhs, Formula::Or { .. })),
            other => panic!("unexpected {other:?}"),
        }
        let e = parse_expr("1 + 2 * x - y").unwrap();
        assert!(matches!(e, Expr::Bin { op: BinOp::Sub, .. }));
    }

    #[test]
    fn errors_report_position_and_expectations() {
        let err = parse_formula("always ((x) > )").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 15);
        assert!(err.expected.contains("expression"), "{err}");

        let err = parse_formula("x >\n  5 and").unwrap_err();
        assert_eq!((err.line, err.col), (2, 8));

        assert!(parse_formula("min(x) > 1").is_err());
        assert!(parse_formula("x > 1 y").is_err());
        assert!(parse_formula("x # 1").is_err());
    }
}
