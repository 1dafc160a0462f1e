//! Textual assurance cases rendered from evidence trees.

use serde::{Deserialize, Serialize};

pub use crate::evidence::{export_json, import_json, EvidenceDocument};
use crate::evidence::{Evidence, EvidenceKind};
use crate::lang::{render_formula, Formula};
use crate::stats::ProbBound;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Lines longer than this are wrapped at spaces with a trailing `\`.
    pub width: usize,
    /// Formulas whose rendering exceeds this many characters are cut short
    /// with `(...)`. `None` prints them in full.
    pub abbreviate_after: Option<usize>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { width: 100, abbreviate_after: None }
    }
}

const STEP: usize = 2;
const CONTINUATION: usize = 4;

struct Out<'a> {
    opts: &'a RenderOptions,
    text: String,
}

impl Out<'_> {
    fn line(&mut self, indent: usize, content: &str) {
        let pad = " ".repeat(indent);
        let limit = self.opts.width.max(indent + 20);
        let mut current = pad.clone();
        let mut first_word = true;
        for word in content.split(' ') {
            let extra = if first_word { word.len() } else { word.len() + 1 };
            if !first_word && current.len() + extra + 1 > limit {
                current.push('\\');
                self.text.push_str(&current);
                self.text.push('\n');
                current = " ".repeat(indent + CONTINUATION);
                current.push_str(word);
                first_word = false;
                continue;
            }
            if !first_word {
                current.push(' ');
            }
            current.push_str(word);
            first_word = false;
        }
        self.text.push_str(&current);
        self.text.push('\n');
    }

    fn formula(&mut self, indent: usize, f: &Formula) {
        let mut s = render_formula(f);
        if let Some(max) = self.opts.abbreviate_after {
            if s.chars().count() > max {
                s = s.chars().take(max).collect::<String>() + " (...)";
            }
        }
        self.line(indent, &s);
    }
}

pub fn percent(p: f64) -> String {
    format!("{:.2}", p * 100.0)
}

pub fn confidence(c: f64) -> String {
    format!("{c:.4}")
}

/// Renders `root` as an indented textual assurance case.
pub fn render_case(root: &Evidence, opts: &RenderOptions) -> String {
    let mut out = Out { opts, text: String::new() };
    node(&mut out, root, 0);
    out.text
}

fn node(out: &mut Out<'_>, e: &Evidence, indent: usize) {
    let inner = indent + STEP;
    if e.bound == ProbBound::CERTAIN {
        out.line(indent, "Contract Result:");
        out.line(inner, &format!("Component: {}", e.component));
    } else {
        out.line(indent, "Probabilistic Contract Result:");
        out.line(inner, &format!("Component: {}", e.component));
        out.line(inner, &format!("Minimum {}", percent(e.bound.p)));
        out.line(inner, &format!("Confidence {}", confidence(e.bound.c)));
    }
    out.line(inner, "Assumptions:");
    section(out, &e.contract.assumptions, inner + STEP);
    out.line(inner, "Guarantees:");
    section(out, &e.contract.guarantees, inner + STEP);
    out.line(inner, "Evidence:");
    evidence(out, e, inner + STEP);
}

fn section(out: &mut Out<'_>, f: &Formula, indent: usize) {
    if *f == Formula::TRUE {
        out.line(indent, "None");
        return;
    }
    for c in f.conjuncts() {
        out.formula(indent, c);
    }
}

fn rule_name(kind: EvidenceKind) -> &'static str {
    match kind {
        EvidenceKind::Composed => "Composition (union bound)",
        EvidenceKind::Conjoined => "Conjunction (union bound)",
        EvidenceKind::StrongMerged => "Strong Merge (union bound)",
        EvidenceKind::WeakMerged => "Weak Merge (mixture)",
        _ => "",
    }
}

/// Operands of a chain of same-kind union combinations, left to right.
fn operands(e: &Evidence) -> Vec<&Evidence> {
    let mut out = Vec::new();
    for c in &e.children {
        if c.kind == e.kind && e.kind != EvidenceKind::WeakMerged {
            out.extend(operands(c));
        } else {
            out.push(c);
        }
    }
    out
}

fn evidence(out: &mut Out<'_>, e: &Evidence, indent: usize) {
    match e.kind {
        EvidenceKind::Test => testing(out, e, indent),
        EvidenceKind::Proof => {
            let cert = e.meta.certificate.as_ref().expect("validated proof node");
            let verdict = if cert.accepted { "Accepted" } else { "Rejected" };
            out.line(indent, &format!("Proof '{}' checked by {}: {verdict}", cert.id, cert.checker));
            if let Some(scope) = &cert.scope {
                out.line(indent, &format!("Scope: {scope}"));
            }
            diagnostics(out, e, indent);
        }
        EvidenceKind::Assumption => {
            out.line(indent, "Assumed");
            if let Some(j) = &e.meta.justification {
                out.line(indent, &format!("Justification: {j}"));
            }
        }
        EvidenceKind::Refined => {
            let w = e.meta.witness.as_ref().expect("validated refinement node");
            out.line(indent, &format!("Refinement Method: {}", w.method.describe()));
            let child = &e.children[0];
            if matches!(child.kind, EvidenceKind::Composed | EvidenceKind::Conjoined | EvidenceKind::StrongMerged) {
                out.line(indent, &format!("{}:", rule_name(child.kind)));
                for c in operands(child) {
                    node(out, c, indent);
                }
            } else {
                node(out, child, indent);
            }
        }
        EvidenceKind::Composed | EvidenceKind::Conjoined | EvidenceKind::StrongMerged => {
            out.line(indent, &format!("{}:", rule_name(e.kind)));
            for c in operands(e) {
                node(out, c, indent);
            }
        }
        EvidenceKind::WeakMerged => {
            let w = e.meta.weight.as_ref().expect("validated weak merge node");
            out.line(indent, &format!("{}:", rule_name(e.kind)));
            out.line(indent, &format!("Weight {} ({})", confidence(w.p), w.provenance));
            for c in &e.children {
                node(out, c, indent);
            }
        }
        EvidenceKind::WeakMergeTested => {
            out.line(indent, "Weak Merge Testing:");
            testing(out, e, indent);
            for c in &e.children {
                out.line(indent, &format!("Sub Result (Correctness={:.2}):", c.bound.p));
                node(out, c, indent + STEP);
            }
        }
    }
}

fn testing(out: &mut Out<'_>, e: &Evidence, indent: usize) {
    let o = e.meta.outcome.clone().unwrap_or_default();
    out.line(indent, "Simulation-Based Testing");
    if let Some(s) = &e.meta.source {
        let hash: String = s.scenario_hash.chars().take(12).collect();
        out.line(indent, &format!("Sampled from Scenario '{}' (Hash={hash}), Seed {}, Stream '{}'", s.scenario, s.seed, s.stream));
    }
    out.line(
        indent,
        &format!(
            "{} Verified,  {} Rejected,  {} A-Violated,  {} G-Violated",
            o.n_verified, o.n_rejected, o.n_a_violated, o.n_g_violated
        ),
    );
    if o.n_static_pass > 0 {
        out.line(indent, &format!("{} Statically Passed", o.n_static_pass));
    }
    if o.n_aborted > 0 {
        out.line(indent, &format!("{} Aborted", o.n_aborted));
    }
    match o.wall_seconds {
        Some(s) => out.line(indent, &format!("{} Samples, {s:.2} Seconds", o.n_sampled)),
        None => out.line(indent, &format!("{} Samples", o.n_sampled)),
    }
    if o.n_eff() > 0 {
        let mean = o.mean_correctness();
        out.line(indent, &format!("Mean Correctness: {}%", percent(mean)));
        out.line(indent, &format!("Gap (Mean - Minimum): {:.4}", mean - e.bound.p));
    }
    diagnostics(out, e, indent);
}

fn diagnostics(out: &mut Out<'_>, e: &Evidence, indent: usize) {
    for d in &e.meta.diagnostics {
        out.line(indent, &format!("Note: {d}"));
    }
}
