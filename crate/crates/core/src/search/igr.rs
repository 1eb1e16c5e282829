// SPDX-License-Identifier: Apache-2.0

//! Idea-guided refinement.
//!
//! `k` architectural ideas are drawn one at a time, each prompt listing the
//! ideas before it. Every idea seeds its own chain: an implementation of
//! the idea followed by up to `m - 1` diff-based refinements, each from the
//! previous node of the same chain. Chains advance round-robin, so the
//! first round creates all chain roots before any chain is refined.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{apply_response, code_proposal, Proposal, SearchContext, SearchError, Strategy};
use crate::domain::{Node, NodeId, TokenUsage};
use crate::llm::{complete_code, complete_parsed, complete_with_retry, prompts, LlmError};

pub const DEFAULT_IDEAS: usize = 60;
pub const DEFAULT_CHAIN_LENGTH: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IgrConfig {
    /// Number of ideas `k`.
    pub ideas: usize,
    /// Nodes per chain `m`, the root included.
    pub chain_length: usize,
}

impl Default for IgrConfig {
    fn default() -> Self {
        Self { ideas: DEFAULT_IDEAS, chain_length: DEFAULT_CHAIN_LENGTH }
    }
}

impl IgrConfig {
    pub fn budget(&self) -> usize {
        self.ideas * self.chain_length
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Idea {
    /// 1-based; also the id of the chain it seeds.
    pub index: usize,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_used: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainStatus {
    Active,
    Exhausted,
    Solved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub idea: Idea,
    pub nodes: Vec<NodeId>,
    pub status: ChainStatus,
}

pub struct IgrStrategy {
    config: IgrConfig,
    chains: Vec<Chain>,
    /// Idea slots used so far, skipped ones included.
    ideas_drawn: usize,
    events: Vec<Value>,
}

fn nonempty(text: &str) -> Result<String, LlmError> {
    match text.trim() {
        "" => Err(LlmError::Malformed("empty idea".into())),
        t => Ok(t.to_string()),
    }
}

fn unusable(e: &LlmError) -> bool {
    matches!(e, LlmError::Malformed(_) | LlmError::Refusal(_))
}

impl IgrStrategy {
    pub fn new(config: IgrConfig) -> Self {
        Self { config, chains: Vec::new(), ideas_drawn: 0, events: Vec::new() }
    }

    pub fn config(&self) -> IgrConfig {
        self.config
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn ideas(&self) -> impl Iterator<Item = &Idea> {
        self.chains.iter().map(|c| &c.idea)
    }

    fn chain_mut(&mut self, index: usize) -> Option<&mut Chain> {
        self.chains.iter_mut().find(|c| c.idea.index == index)
    }

    /// Draws ideas until one succeeds or the idea budget runs out. Unusable
    /// replies leave a gap in the numbering.
    fn draw_idea(&mut self, ctx: &SearchContext<'_>) -> Result<Option<(usize, TokenUsage)>, SearchError> {
        while self.ideas_drawn < self.config.ideas {
            self.ideas_drawn += 1;
            let index = self.ideas_drawn;
            let prior: Vec<String> = self.ideas().map(|i| i.text.clone()).collect();
            let prompt = prompts::idea_gen(ctx.spec, &prior, ctx.budget());
            match complete_parsed(ctx.llm, &prompt, ctx.policy, nonempty) {
                Ok(r) => {
                    self.events.push(json!({
                        "event": "idea", "chain": index, "text": r.code,
                        "prompt": prompt.user, "response": r.raw,
                    }));
                    let idea = Idea { index, text: r.code, context_used: ctx.spec.context.clone() };
                    self.chains.push(Chain { idea, nodes: Vec::new(), status: ChainStatus::Active });
                    return Ok(Some((index, r.usage)));
                }
                Err(e) if unusable(&e) => {
                    log::warn!("idea {index} skipped: {e}");
                    self.events.push(json!({ "event": "idea_gap", "chain": index, "error": e.to_string() }));
                }
                Err(e) => {
                    self.ideas_drawn -= 1;
                    return Err(e.into());
                }
            }
        }
        Ok(None)
    }

    /// Active chain with the fewest nodes; ties go to the lowest index.
    fn next_chain(&self) -> Option<usize> {
        self.chains
            .iter()
            .filter(|c| c.status == ChainStatus::Active)
            .min_by_key(|c| (c.nodes.len(), c.idea.index))
            .map(|c| c.idea.index)
    }

    fn implement(&mut self, ctx: &SearchContext<'_>, chain: usize, usage: TokenUsage) -> Result<Proposal, SearchError> {
        let text = self.chain_mut(chain).map(|c| c.idea.text.clone()).unwrap_or_default();
        let prompt = prompts::idea_impl(ctx.spec, &text, ctx.budget());
        let res = complete_code(ctx.llm, &prompt, ctx.policy);
        self.events.push(json!({
            "event": "attempt", "chain": chain, "node_index": ctx.next_index(),
            "template_id": prompts::ID_IDEA_IMPL, "prompt": prompt.user,
            "response": res.as_ref().ok().map(|r| r.raw.clone()),
            "error": res.as_ref().err().map(|e| e.to_string()),
        }));
        let mut p = code_proposal(res, None, prompts::ID_IDEA_IMPL, Some(chain))?;
        p.tokens += usage;
        Ok(p)
    }

    /// One refinement step: a diff edit, one retry that shows the edit
    /// error, then full-file regeneration. If all three fail the step is
    /// recorded as a forced failure.
    fn refine(&mut self, ctx: &SearchContext<'_>, chain: usize) -> Result<Proposal, SearchError> {
        let c = self.chain_mut(chain).expect("chain exists");
        let idea = c.idea.text.clone();
        let parent_id = *c.nodes.last().expect("refined chains have a root");
        let parent = ctx
            .archive
            .get(parent_id)
            .ok_or_else(|| SearchError::Restore(format!("{parent_id} is in chain {chain} but not in the archive")))?;

        let mut usage = TokenUsage::default();
        let mut edit_error: Option<String> = None;
        for _ in 0..2 {
            let prompt = prompts::refine_diff(
                ctx.spec,
                &idea,
                &parent.code,
                parent.score,
                &parent.feedback,
                edit_error.as_deref(),
                ctx.budget(),
            );
            let (response, outcome) = match complete_with_retry(ctx.llm, &prompt, ctx.policy) {
                Ok(out) => {
                    usage += out.usage;
                    let applied = apply_response(&parent.code, &out.text).map_err(|e| e.to_string());
                    (Some(out.text), applied)
                }
                Err(e) if unusable(&e) => (None, Err(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            self.events.push(json!({
                "event": "attempt", "chain": chain, "node_index": ctx.next_index(),
                "template_id": prompts::ID_REFINE_DIFF, "prompt": prompt.user,
                "response": response, "error": outcome.as_ref().err(),
            }));
            match outcome {
                Ok(code) => {
                    return Ok(Proposal {
                        parent: Some(parent_id),
                        code,
                        template_id: prompts::ID_REFINE_DIFF.to_string(),
                        chain: Some(chain),
                        forced_failure: None,
                        tokens: usage,
                    });
                }
                Err(e) => edit_error = Some(e),
            }
        }

        let prompt = prompts::refine(ctx.spec, &parent.code, parent.score, &parent.feedback, ctx.budget());
        let res = complete_code(ctx.llm, &prompt, ctx.policy);
        self.events.push(json!({
            "event": "attempt", "chain": chain, "node_index": ctx.next_index(),
            "template_id": prompts::ID_REFINE, "prompt": prompt.user,
            "response": res.as_ref().ok().map(|r| r.raw.clone()),
            "error": res.as_ref().err().map(|e| e.to_string()),
        }));
        let mut p = code_proposal(res, Some(parent_id), prompts::ID_REFINE, Some(chain))?;
        if let Some(msg) = &mut p.forced_failure {
            *msg = format!(
                "edit could not be applied ({}); full regeneration failed: {msg}",
                edit_error.unwrap_or_default()
            );
        }
        p.tokens += usage;
        Ok(p)
    }
}

impl Strategy for IgrStrategy {
    fn name(&self) -> &'static str {
        "igr"
    }

    fn propose(&mut self, ctx: &SearchContext<'_>) -> Result<Option<Proposal>, SearchError> {
        // A chain created before an interruption may still lack its root.
        if let Some(c) = self.chains.iter().find(|c| c.nodes.is_empty()) {
            let index = c.idea.index;
            return self.implement(ctx, index, TokenUsage::default()).map(Some);
        }
        if let Some((index, usage)) = self.draw_idea(ctx)? {
            return self.implement(ctx, index, usage).map(Some);
        }
        match self.next_chain() {
            Some(chain) => self.refine(ctx, chain).map(Some),
            None => Ok(None),
        }
    }

    fn observe(&mut self, node: &Node) {
        let m = self.config.chain_length;
        let Some(index) = node.chain else {
            log::warn!("{} carries no chain id; ignored", node.id);
            return;
        };
        let Some(chain) = self.chain_mut(index) else {
            log::warn!("{} names unknown chain {index}; ignored", node.id);
            return;
        };
        chain.nodes.push(node.id);
        chain.status = if node.score >= 1.0 {
            ChainStatus::Solved
        } else if chain.nodes.len() >= m {
            ChainStatus::Exhausted
        } else {
            ChainStatus::Active
        };
        let status = chain.status;
        self.events.push(json!({
            "event": "node", "chain": index, "node": node.id, "score": node.score,
            "template_id": node.template_id, "status": status,
        }));
    }

    fn restore(&mut self, nodes: &[Node], events: &[Value]) -> Result<(), SearchError> {
        self.chains.clear();
        self.ideas_drawn = 0;
        for ev in events {
            let kind = ev.get("event").and_then(Value::as_str);
            let index = ev.get("chain").and_then(Value::as_u64).map(|i| i as usize);
            match (kind, index) {
                (Some("idea"), Some(index)) => {
                    let text = ev
                        .get("text")
                        .and_then(Value::as_str)
                        .ok_or_else(|| SearchError::Restore(format!("idea {index} has no text")))?;
                    self.chains.push(Chain {
                        idea: Idea { index, text: text.to_string(), context_used: None },
                        nodes: Vec::new(),
                        status: ChainStatus::Active,
                    });
                    self.ideas_drawn = self.ideas_drawn.max(index);
                }
                (Some("idea_gap"), Some(index)) => self.ideas_drawn = self.ideas_drawn.max(index),
                _ => {}
            }
        }
        for n in nodes {
            self.observe(n);
        }
        self.events.clear();
        Ok(())
    }

    fn drain_events(&mut self) -> Vec<Value> {
        std::mem::take(&mut self.events)
    }
}
