// SPDX-License-Identifier: Apache-2.0

//! Candidate nodes, scoring formulas, feedback selection and the archive.

mod archive;
mod feedback;
mod node;
mod problem;
mod score;

pub use archive::Archive;
pub use feedback::{
    directive_sentence, opt_guidance, select_feedback, FailingVector, Feedback, FeedbackKind,
    MAX_FAILING_VECTORS,
};
pub use node::{Node, NodeId, TokenUsage};
pub use problem::{Directive, ProblemError, ProblemSpec, Task};
pub use score::{
    is_penalty, score_generation, score_optimization, ScoreError, DEFAULT_C_PENALTY, DEFAULT_ETA,
};
