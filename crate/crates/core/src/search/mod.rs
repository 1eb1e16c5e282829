// SPDX-License-Identifier: Apache-2.0

//! Parent-selection strategies.
//!
//! A strategy turns the current archive into the next candidate to
//! evaluate, calling the model as needed, and is told about every node once
//! it has been scored.

pub mod edit;
pub mod igr;
pub mod mcts;
mod random;

use serde_json::Value;
use thiserror::Error;

use crate::domain::{Archive, Node, NodeId, ProblemSpec, TokenUsage};
use crate::llm::{BudgetInfo, LanguageModel, LlmError, RetryPolicy};

pub use edit::{apply_edits, apply_response, parse_edit_script, EditError, EditScript, Hunk};
pub use igr::{Chain, ChainStatus, Idea, IgrConfig, IgrStrategy};
pub use mcts::{uct_score, MctsConfig, MctsStrategy, Tree, TreeNode};
pub use random::RandomParentStrategy;

/// What a strategy may look at while proposing.
pub struct SearchContext<'a> {
    pub spec: &'a ProblemSpec,
    pub llm: &'a dyn LanguageModel,
    pub archive: &'a Archive,
    pub policy: RetryPolicy,
    pub max_nodes: usize,
}

impl SearchContext<'_> {
    /// 1-based index the next node will receive.
    pub fn next_index(&self) -> usize {
        self.archive.node_count() + 1
    }

    pub fn budget(&self) -> BudgetInfo {
        BudgetInfo { node_index: self.next_index(), max_nodes: self.max_nodes }
    }
}

/// A candidate ready for evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub parent: Option<NodeId>,
    pub code: String,
    pub template_id: String,
    pub chain: Option<usize>,
    /// Set when no usable candidate could be produced; the node is recorded
    /// with the penalty score and this message instead of being evaluated.
    pub forced_failure: Option<String>,
    pub tokens: TokenUsage,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("cannot restore search state: {0}")]
    Restore(String),
}

pub trait Strategy: Send {
    fn name(&self) -> &'static str;

    /// Next candidate, or `None` when the strategy has nothing left to try.
    fn propose(&mut self, ctx: &SearchContext<'_>) -> Result<Option<Proposal>, SearchError>;

    /// Called with every node after evaluation, in archive order.
    fn observe(&mut self, node: &Node);

    /// Rebuilds state from a persisted archive and event log.
    fn restore(&mut self, nodes: &[Node], events: &[Value]) -> Result<(), SearchError>;

    /// JSON snapshot of the search structure, if it has one.
    fn snapshot(&self) -> Option<Value> {
        None
    }

    /// Transcript events produced since the last call.
    fn drain_events(&mut self) -> Vec<Value> {
        Vec::new()
    }
}

/// Turns a code request into a proposal; model output that stays unusable
/// after the retry policy becomes a forced failure, other errors propagate.
pub(crate) fn code_proposal(
    result: Result<crate::llm::CodeResponse, LlmError>,
    parent: Option<NodeId>,
    template_id: &str,
    chain: Option<usize>,
) -> Result<Proposal, SearchError> {
    match result {
        Ok(r) => Ok(Proposal {
            parent,
            code: r.code,
            template_id: template_id.to_string(),
            chain,
            forced_failure: None,
            tokens: r.usage,
        }),
        Err(e @ (LlmError::Malformed(_) | LlmError::Refusal(_))) => Ok(Proposal {
            parent,
            code: String::new(),
            template_id: template_id.to_string(),
            chain,
            forced_failure: Some(e.to_string()),
            tokens: TokenUsage::default(),
        }),
        Err(e) => Err(e.into()),
    }
}
