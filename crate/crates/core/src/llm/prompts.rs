// SPDX-License-Identifier: Apache-2.0

//! Prompt assembly from the versioned templates under `templates/`.
//!
//! The templates are a best-effort reconstruction; no published wording
//! exists for them. Bump the `@vN` suffix whenever a template changes.

use std::fmt::Write as _;

use super::{BudgetInfo, PromptBundle, Purpose};
use crate::domain::{directive_sentence, Feedback, ProblemSpec, Task};

pub const SYSTEM: &str = include_str!("../../templates/system.txt");
pub const INITIAL_CODE: &str = include_str!("../../templates/initial_code.txt");
pub const REFINE: &str = include_str!("../../templates/refine.txt");
pub const REFINE_DIFF: &str = include_str!("../../templates/refine_diff.txt");
pub const IDEA_GEN: &str = include_str!("../../templates/idea_gen.txt");
pub const IDEA_IMPL: &str = include_str!("../../templates/idea_impl.txt");
pub const SUMMARY: &str = include_str!("../../templates/summary.txt");
pub const FORMAT_REMINDER: &str = include_str!("../../templates/format_reminder.txt");

pub const ID_INITIAL_CODE: &str = "initial_code@v1";
pub const ID_REFINE: &str = "refine@v1";
pub const ID_REFINE_DIFF: &str = "refine_diff@v1";
pub const ID_IDEA_GEN: &str = "idea_gen@v1";
pub const ID_IDEA_IMPL: &str = "idea_impl@v1";
pub const ID_SUMMARY: &str = "summary@v1";

/// Replaces every `{{key}}` in `template`. Unknown keys are left as is.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{{{k}}}}}"), v);
    }
    out
}

fn task_line(spec: &ProblemSpec) -> String {
    match spec.task {
        Task::Gen => "Task: functional correctness against the reference testbench.".to_string(),
        Task::Opt { directive } => format!(
            "Task: optimise area and latency at a {} ns clock period while staying functionally correct; objective: {}.",
            spec.clock_period_ns,
            directive_sentence(directive)
        ),
    }
}

fn context_section(spec: &ProblemSpec) -> String {
    match spec.context.as_deref().map(str::trim) {
        Some(c) if !c.is_empty() => format!("\nReference material:\n{c}\n"),
        _ => String::new(),
    }
}

fn bundle(user: String, purpose: Purpose, template_id: &str, budget: BudgetInfo) -> PromptBundle {
    PromptBundle { system: SYSTEM.trim_end().to_string(), user, purpose, template_id: template_id.to_string(), budget }
}

fn base_vars(spec: &ProblemSpec) -> (String, String) {
    (task_line(spec), context_section(spec))
}

pub fn initial_code(spec: &ProblemSpec, budget: BudgetInfo) -> PromptBundle {
    let (task, ctx) = base_vars(spec);
    let user = render(
        INITIAL_CODE,
        &[("top", &spec.top_module), ("task_line", &task), ("description", spec.description.trim()), ("context_section", &ctx)],
    );
    bundle(user, Purpose::InitialCode, ID_INITIAL_CODE, budget)
}

/// Full-file refinement from a parent's code, score and feedback.
pub fn refine(spec: &ProblemSpec, parent_code: &str, score: f64, feedback: &Feedback, budget: BudgetInfo) -> PromptBundle {
    let (task, _) = base_vars(spec);
    let score = score.to_string();
    let user = render(
        REFINE,
        &[
            ("top", &spec.top_module),
            ("task_line", &task),
            ("description", spec.description.trim()),
            ("score", &score),
            ("parent_code", parent_code.trim_end()),
            ("feedback", feedback.text.trim_end()),
        ],
    );
    bundle(user, Purpose::Refine, ID_REFINE, budget)
}

/// Diff-based refinement within an idea chain. `edit_error` carries the
/// reason a previous edit script could not be applied.
pub fn refine_diff(
    spec: &ProblemSpec,
    idea: &str,
    parent_code: &str,
    score: f64,
    feedback: &Feedback,
    edit_error: Option<&str>,
    budget: BudgetInfo,
) -> PromptBundle {
    let (task, _) = base_vars(spec);
    let score = score.to_string();
    let err = match edit_error {
        Some(e) => format!("\nYour previous edit could not be applied: {e}\n"),
        None => String::new(),
    };
    let user = render(
        REFINE_DIFF,
        &[
            ("idea", idea.trim()),
            ("top", &spec.top_module),
            ("task_line", &task),
            ("description", spec.description.trim()),
            ("score", &score),
            ("parent_code", parent_code.trim_end()),
            ("feedback", feedback.text.trim_end()),
            ("edit_error_section", &err),
        ],
    );
    bundle(user, Purpose::Refine, ID_REFINE_DIFF, budget)
}

/// Idea generation; every earlier idea is listed so the model diversifies.
pub fn idea_gen(spec: &ProblemSpec, prior_ideas: &[String], budget: BudgetInfo) -> PromptBundle {
    let (task, ctx) = base_vars(spec);
    let mut prior = String::new();
    if !prior_ideas.is_empty() {
        prior.push_str("\nPreviously proposed ideas (propose something substantially different):\n");
        for (i, idea) in prior_ideas.iter().enumerate() {
            let _ = writeln!(prior, "{}. {}", i + 1, idea.trim());
        }
    }
    let user = render(
        IDEA_GEN,
        &[
            ("top", &spec.top_module),
            ("task_line", &task),
            ("description", spec.description.trim()),
            ("context_section", &ctx),
            ("prior_ideas_section", &prior),
        ],
    );
    bundle(user, Purpose::IdeaGen, ID_IDEA_GEN, budget)
}

pub fn idea_impl(spec: &ProblemSpec, idea: &str, budget: BudgetInfo) -> PromptBundle {
    let (task, ctx) = base_vars(spec);
    let user = render(
        IDEA_IMPL,
        &[
            ("idea", idea.trim()),
            ("top", &spec.top_module),
            ("task_line", &task),
            ("description", spec.description.trim()),
            ("context_section", &ctx),
        ],
    );
    bundle(user, Purpose::InitialCode, ID_IDEA_IMPL, budget)
}

pub fn summary(code: &str) -> PromptBundle {
    let user = render(SUMMARY, &[("code", code.trim_end())]);
    bundle(user, Purpose::Summary, ID_SUMMARY, BudgetInfo::default())
}

/// The same request with a reminder about the expected reply format.
pub fn with_format_reminder(b: &PromptBundle) -> PromptBundle {
    PromptBundle { user: format!("{}{}", b.user.trim_end(), FORMAT_REMINDER.trim_end()), ..b.clone() }
}
