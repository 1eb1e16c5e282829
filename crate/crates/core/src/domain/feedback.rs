// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{is_penalty, Directive, Task};
use crate::eval::EvalReport;

/// Cap on failing-vector excerpts carried into prompts.
pub const MAX_FAILING_VECTORS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    ErrorMsg,
    DesignSummary,
    OptGuidanceAndSummary,
}

/// One mismatching output observed by the testbench.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingVector {
    /// Simulation time of the check, in testbench time units.
    pub time: u64,
    pub signal: String,
    /// Input assignment active at the check, when it can be recovered.
    pub inputs: String,
    pub expected: String,
    pub observed: String,
}

impl FailingVector {
    fn render(&self, out: &mut String) {
        let _ = write!(out, "  t={} sig={}", self.time, self.signal);
        if !self.inputs.is_empty() {
            let _ = write!(out, " inputs[{}]", self.inputs);
        }
        let _ = writeln!(out, " expected={} got={}", self.expected, self.observed);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub kind: FeedbackKind,
    pub text: String,
    #[serde(default)]
    pub failing_vectors: Vec<FailingVector>,
}

impl Feedback {
    pub fn error(text: impl Into<String>) -> Self {
        Self { kind: FeedbackKind::ErrorMsg, text: text.into(), failing_vectors: Vec::new() }
    }
}

pub fn directive_sentence(directive: Directive) -> &'static str {
    match directive {
        Directive::Balanced => "minimize area×latency",
        Directive::OptArea => "reduce area without increasing latency",
        Directive::OptCycle => "reduce cycle count, area increase permitted",
    }
}

pub fn opt_guidance(area: f64, latency: f64, score: f64, directive: Directive) -> String {
    format!(
        "current area={area} µm², latency={latency} ns, score={score}; objective: {}",
        directive_sentence(directive)
    )
}

/// Builds the feedback for a scored candidate.
///
/// The variant depends only on the task kind and whether `score` is the
/// penalty; the report supplies the text. `summary` is the design summary
/// already produced for this candidate (ignored for penalty scores).
pub fn select_feedback(
    task: Task,
    score: f64,
    c_penalty: f64,
    report: &EvalReport,
    summary: &str,
) -> Feedback {
    let failing: Vec<FailingVector> =
        report.failing_vectors.iter().take(MAX_FAILING_VECTORS).cloned().collect();

    if is_penalty(score, c_penalty) {
        return Feedback { kind: FeedbackKind::ErrorMsg, text: error_text(report, &failing), failing_vectors: failing };
    }

    let summary_text = design_summary_text(report, &failing, summary);
    match task {
        Task::Gen => Feedback { kind: FeedbackKind::DesignSummary, text: summary_text, failing_vectors: failing },
        Task::Opt { directive } => {
            let guidance = opt_guidance(
                report.area_um2.unwrap_or_default(),
                report.latency_ns.unwrap_or_default(),
                score,
                directive,
            );
            Feedback {
                kind: FeedbackKind::OptGuidanceAndSummary,
                text: format!("{guidance}\n\n{summary_text}"),
                failing_vectors: failing,
            }
        }
    }
}

fn error_text(report: &EvalReport, failing: &[FailingVector]) -> String {
    let mut out = String::new();
    let reason = match &report.failure {
        Some(r) => r.clone(),
        None if report.timed_out => "timeout".to_string(),
        None if !report.compile_ok => "compilation failed".to_string(),
        None if !report.sim_ok => "simulation failed".to_string(),
        None => format!("functional mismatch: passed {}/{} vectors", report.pass, report.total),
    };
    out.push_str(&reason);
    out.push('\n');
    if !report.stderr_excerpt.is_empty() {
        out.push_str(&report.stderr_excerpt);
        if !report.stderr_excerpt.ends_with('\n') {
            out.push('\n');
        }
    }
    push_failures(&mut out, failing, report.failing_vectors.len());
    out
}

fn design_summary_text(report: &EvalReport, failing: &[FailingVector], summary: &str) -> String {
    let mut out = String::new();
    if report.total > 0 {
        let _ = writeln!(
            out,
            "testbench: passed {}/{} vectors (pass rate {})",
            report.pass,
            report.total,
            report.pass as f64 / report.total as f64
        );
    }
    push_failures(&mut out, failing, report.failing_vectors.len());
    out.push_str("design summary:\n");
    out.push_str(summary.trim_end());
    out.push('\n');
    out
}

fn push_failures(out: &mut String, shown: &[FailingVector], total: usize) {
    if shown.is_empty() {
        return;
    }
    out.push_str("failing vectors:\n");
    for f in shown {
        f.render(out);
    }
    if total > shown.len() {
        let _ = writeln!(out, "  ... {} more", total - shown.len());
    }
}
