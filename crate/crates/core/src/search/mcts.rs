// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo tree search over evaluated candidates.
//!
//! Every tree node is an evaluated design. Selection walks down from the
//! root by UCT until it reaches a node with spare expansion capacity; that
//! node's code is refined into a new child, and the child's score is added
//! to the visit count and quality sum of every node on the path back to the
//! root.

use std::collections::HashMap;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::{code_proposal, Proposal, SearchContext, SearchError, Strategy};
use crate::domain::{Node, NodeId};
use crate::llm::{complete_code, prompts};

pub const DEFAULT_EXPANSION_RATE: usize = 3;
pub const DEFAULT_EXPLORATION: f64 = 1.4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MctsConfig {
    /// Maximum number of children per node.
    pub expansion_rate: usize,
    /// Exploration constant `c`.
    pub exploration: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self { expansion_rate: DEFAULT_EXPANSION_RATE, exploration: DEFAULT_EXPLORATION }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub node: NodeId,
    /// The node's own evaluation score.
    pub score: f64,
    /// Visit count `C`.
    pub visits: u64,
    /// Quality sum `Q`.
    pub quality: f64,
    /// Arena indices, in insertion order.
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub depth: u32,
}

impl TreeNode {
    /// A fresh child: no visits and no quality yet.
    pub fn leaf(node: NodeId, score: f64, parent: Option<usize>, depth: u32) -> Self {
        Self { node, score, visits: 0, quality: 0.0, children: Vec::new(), parent, depth }
    }
}

/// UCT value of `child` under `parent`; unvisited children rank first.
pub fn uct_score(parent: &TreeNode, child: &TreeNode, c: f64) -> f64 {
    if child.visits == 0 {
        return f64::INFINITY;
    }
    let exploit = child.quality / child.visits as f64;
    let explore = c * (parent.visits.max(1) as f64).sqrt() / (1.0 + child.visits as f64);
    exploit + explore
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("no tree node at index {0}")]
    UnknownIndex(usize),
    #[error("{node} already has the maximum of {limit} children")]
    Full { node: NodeId, limit: usize },
    #[error("{0} is already in the tree")]
    Duplicate(NodeId),
}

/// Arena-backed search tree. Index 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    by_id: HashMap<NodeId, usize>,
    config: MctsConfig,
}

impl Tree {
    /// Starts a tree from the first evaluated node. Its own evaluation is
    /// counted as the first backpropagation, so the root begins with
    /// `C = 1` and `Q = score`.
    pub fn new(root: NodeId, score: f64, config: MctsConfig) -> Self {
        let mut r = TreeNode::leaf(root, score, None, 0);
        r.visits = 1;
        r.quality = score;
        Self { nodes: vec![r], by_id: HashMap::from([(root, 0)]), config }
    }

    pub fn config(&self) -> MctsConfig {
        self.config
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn get(&self, index: usize) -> Option<&TreeNode> {
        self.nodes.get(index)
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.by_id.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn expandable(&self, index: usize) -> bool {
        self.nodes[index].children.len() < self.config.expansion_rate
    }

    /// Descends from the root by UCT and returns the first node with spare
    /// capacity. Ties go to the earliest child.
    pub fn select_leaf(&self) -> usize {
        let mut cur = 0;
        while !self.expandable(cur) {
            let parent = &self.nodes[cur];
            let mut best = parent.children[0];
            let mut best_value = uct_score(parent, &self.nodes[best], self.config.exploration);
            for &ch in &parent.children[1..] {
                let v = uct_score(parent, &self.nodes[ch], self.config.exploration);
                if v > best_value {
                    best = ch;
                    best_value = v;
                }
            }
            cur = best;
        }
        cur
    }

    /// Attaches an evaluated child under `leaf` and backpropagates its score
    /// through `leaf` and all of its ancestors. Returns the child's index.
    pub fn expand_and_backprop(&mut self, leaf: usize, node: NodeId, score: f64) -> Result<usize, TreeError> {
        let parent = self.nodes.get(leaf).ok_or(TreeError::UnknownIndex(leaf))?;
        if !self.expandable(leaf) {
            return Err(TreeError::Full { node: parent.node, limit: self.config.expansion_rate });
        }
        if self.by_id.contains_key(&node) {
            return Err(TreeError::Duplicate(node));
        }
        let idx = self.nodes.len();
        let depth = parent.depth + 1;
        self.nodes.push(TreeNode::leaf(node, score, Some(leaf), depth));
        self.nodes[leaf].children.push(idx);
        self.by_id.insert(node, idx);

        let mut a = Some(leaf);
        while let Some(i) = a {
            let n = &mut self.nodes[i];
            n.visits += 1;
            n.quality += score;
            a = n.parent;
        }
        Ok(idx)
    }

    /// JSON export: one entry per node with id, parent, C, Q, score, depth.
    pub fn snapshot(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| {
                serde_json::json!({
                    "id": n.node,
                    "parent": n.parent.map(|p| self.nodes[p].node),
                    "visits": n.visits,
                    "quality": n.quality,
                    "score": n.score,
                    "depth": n.depth,
                })
            })
            .collect();
        serde_json::json!({
            "expansion_rate": self.config.expansion_rate,
            "exploration": self.config.exploration,
            "nodes": nodes,
        })
    }
}

pub struct MctsStrategy {
    config: MctsConfig,
    tree: Option<Tree>,
}

impl MctsStrategy {
    pub fn new(config: MctsConfig) -> Self {
        Self { config, tree: None }
    }

    pub fn tree(&self) -> Option<&Tree> {
        self.tree.as_ref()
    }
}

impl Strategy for MctsStrategy {
    fn name(&self) -> &'static str {
        "mcts"
    }

    fn propose(&mut self, ctx: &SearchContext<'_>) -> Result<Option<Proposal>, SearchError> {
        let Some(tree) = &self.tree else {
            let prompt = prompts::initial_code(ctx.spec, ctx.budget());
            let res = complete_code(ctx.llm, &prompt, ctx.policy);
            return code_proposal(res, None, prompts::ID_INITIAL_CODE, None).map(Some);
        };
        let leaf = tree.nodes()[tree.select_leaf()].node;
        let parent = ctx
            .archive
            .get(leaf)
            .ok_or_else(|| SearchError::Restore(format!("{leaf} is in the tree but not in the archive")))?;
        let prompt = prompts::refine(ctx.spec, &parent.code, parent.score, &parent.feedback, ctx.budget());
        let res = complete_code(ctx.llm, &prompt, ctx.policy);
        code_proposal(res, Some(leaf), prompts::ID_REFINE, None).map(Some)
    }

    fn observe(&mut self, node: &Node) {
        match (&mut self.tree, node.parent_id) {
            (None, _) => self.tree = Some(Tree::new(node.id, node.score, self.config)),
            (Some(tree), Some(parent)) => {
                let res = match tree.index_of(parent) {
                    Some(leaf) => tree.expand_and_backprop(leaf, node.id, node.score).map(|_| ()),
                    None => Err(TreeError::UnknownIndex(usize::MAX)),
                };
                if let Err(e) = res {
                    log::warn!("{} not added to the search tree: {e}", node.id);
                }
            }
            (Some(_), None) => log::warn!("{} has no parent; ignored by the search tree", node.id),
        }
    }

    fn restore(&mut self, nodes: &[Node], _events: &[Value]) -> Result<(), SearchError> {
        self.tree = None;
        for n in nodes {
            self.observe(n);
        }
        Ok(())
    }

    fn snapshot(&self) -> Option<Value> {
        self.tree.as_ref().map(Tree::snapshot)
    }
}
