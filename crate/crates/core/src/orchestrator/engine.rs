// SPDX-License-Identifier: Apache-2.0

use super::report::RunStatus;
use super::store::RunSink;
use super::RunError;
use crate::domain::{Archive, Feedback, Node, NodeId};
use crate::eval::{EvalTarget, Evaluator};
use crate::llm::{LanguageModel, RetryPolicy};
use crate::search::{SearchContext, Strategy};

/// The evolutionary loop: propose, evaluate, archive, repeat until a Gen
/// run scores 1, the budget is spent, or the strategy has nothing left.
pub struct Engine<'a> {
    pub target: &'a EvalTarget,
    pub evaluator: &'a Evaluator,
    pub llm: &'a dyn LanguageModel,
    pub policy: RetryPolicy,
    pub max_nodes: usize,
}

impl Engine<'_> {
    fn stop_status(&self, archive: &Archive) -> Option<RunStatus> {
        let gen = self.target.spec.task.is_gen();
        if gen && archive.best_score().is_some_and(|s| s >= 1.0) {
            return Some(RunStatus::Solved);
        }
        if archive.node_count() >= self.max_nodes {
            return Some(if gen { RunStatus::BudgetExhausted } else { RunStatus::Complete });
        }
        None
    }

    /// Runs until a stop condition; `archive` keeps every node evaluated,
    /// including on error.
    pub fn run(
        &self,
        strategy: &mut dyn Strategy,
        archive: &mut Archive,
        sink: &mut dyn RunSink,
    ) -> Result<RunStatus, RunError> {
        let spec = &self.target.spec;
        loop {
            if let Some(status) = self.stop_status(archive) {
                return Ok(status);
            }
            let ctx = SearchContext {
                spec,
                llm: self.llm,
                archive,
                policy: self.policy,
                max_nodes: self.max_nodes,
            };
            let Some(proposal) = strategy.propose(&ctx)? else {
                return Ok(if spec.task.is_gen() { RunStatus::StrategyExhausted } else { RunStatus::Complete });
            };

            let index = archive.node_count() + 1;
            let id = NodeId(index as u64);
            let (score, feedback, tokens) = match &proposal.forced_failure {
                Some(msg) => (spec.c_penalty, Feedback::error(msg.clone()), proposal.tokens),
                None => {
                    let e = self.evaluator.evaluate(self.target, &proposal.code, &id.to_string())?;
                    (e.score, e.feedback, proposal.tokens + e.summary_usage)
                }
            };
            let depth = proposal.parent.and_then(|p| archive.get(p)).map_or(0, |p| p.depth + 1);
            let node = Node {
                id,
                code: proposal.code,
                score,
                feedback,
                parent_id: proposal.parent,
                depth,
                created_at_node_index: index,
                template_id: proposal.template_id,
                chain: proposal.chain,
                tokens,
            };
            strategy.observe(&node);
            let events = strategy.drain_events();
            let improved = archive.push(node);
            let node = archive.nodes().last().expect("just pushed");
            log::info!(
                "{} score={} best={}{} ({})",
                node.id,
                node.score,
                archive.best_score().unwrap_or(node.score),
                if improved { " *" } else { "" },
                node.template_id
            );
            sink.record(node, &events, strategy.snapshot().as_ref())
                .map_err(|e| RunError::Io { context: "writing checkpoint".into(), source: e })?;
        }
    }
}
