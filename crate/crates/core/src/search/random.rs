// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::{code_proposal, Proposal, SearchContext, SearchError, Strategy};
use crate::domain::Node;
use crate::llm::{complete_code, prompts};

/// Baseline: refine a parent drawn uniformly from the whole archive.
pub struct RandomParentStrategy {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomParentStrategy {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Strategy for RandomParentStrategy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn propose(&mut self, ctx: &SearchContext<'_>) -> Result<Option<Proposal>, SearchError> {
        let nodes = ctx.archive.nodes();
        if nodes.is_empty() {
            let prompt = prompts::initial_code(ctx.spec, ctx.budget());
            let res = complete_code(ctx.llm, &prompt, ctx.policy);
            return code_proposal(res, None, prompts::ID_INITIAL_CODE, None).map(Some);
        }
        let parent = &nodes[self.rng.random_range(0..nodes.len())];
        let prompt = prompts::refine(ctx.spec, &parent.code, parent.score, &parent.feedback, ctx.budget());
        let res = complete_code(ctx.llm, &prompt, ctx.policy);
        code_proposal(res, Some(parent.id), prompts::ID_REFINE, None).map(Some)
    }

    fn observe(&mut self, _node: &Node) {}

    fn restore(&mut self, nodes: &[Node], _events: &[Value]) -> Result<(), SearchError> {
        // One draw per refined node, so the stream resumes where it stopped.
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        for i in 1..nodes.len() {
            let _ = self.rng.random_range(0..i);
        }
        Ok(())
    }
}
