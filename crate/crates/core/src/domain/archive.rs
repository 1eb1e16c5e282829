// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::Node;

/// Append-only record of every evaluated node plus the running best.
///
/// Ties keep the earlier node, so `best` only moves on strict improvement.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    nodes: Vec<Node>,
    best: Option<usize>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_nodes(nodes: impl IntoIterator<Item = Node>) -> Self {
        let mut archive = Self::new();
        for n in nodes {
            archive.push(n);
        }
        archive
    }

    /// Appends a node; returns true when it became the new best.
    pub fn push(&mut self, node: Node) -> bool {
        let improves = match self.best() {
            None => true,
            Some(b) => node.score > b.score,
        };
        self.nodes.push(node);
        if improves {
            self.best = Some(self.nodes.len() - 1);
        }
        improves
    }

    pub fn best(&self) -> Option<&Node> {
        self.best.map(|i| &self.nodes[i])
    }

    pub fn best_score(&self) -> Option<f64> {
        self.best().map(|n| n.score)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: super::NodeId) -> Option<&Node> {
        // Ids are assigned densely from 1, so try the direct slot first.
        let guess = (id.0 as usize).wrapping_sub(1);
        match self.nodes.get(guess) {
            Some(n) if n.id == id => Some(n),
            _ => self.nodes.iter().find(|n| n.id == id),
        }
    }

    /// Running maximum of the score after each appended node.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut best = f64::NEG_INFINITY;
        for n in &self.nodes {
            if n.score > best {
                best = n.score;
            }
            out.push(best);
        }
        out
    }
}
