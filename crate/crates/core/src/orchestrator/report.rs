// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{BackendKind, LlmKind, RunConfig, StrategyKind};
use crate::domain::{is_penalty, Archive, NodeId, ProblemSpec, Task, TokenUsage};
use crate::eval::ScoreMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Gen run that reached a score of 1.
    Solved,
    /// Opt run that used its whole budget or ran out of proposals.
    Complete,
    /// Gen run that used its whole budget without solving.
    BudgetExhausted,
    /// Gen run whose strategy stopped proposing before the budget ran out.
    StrategyExhausted,
    /// Stopped by an error; the archive holds everything evaluated so far.
    Failed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Solved | RunStatus::Complete => 0,
            RunStatus::BudgetExhausted | RunStatus::StrategyExhausted => 2,
            RunStatus::Failed => 4,
        }
    }

    /// Status implied by an archive alone, used when re-reporting.
    pub fn infer(task: Task, archive: &Archive, max_nodes: usize) -> RunStatus {
        let solved = task.is_gen() && archive.best_score().is_some_and(|s| s >= 1.0);
        match (solved, task.is_gen(), archive.node_count() >= max_nodes) {
            (true, ..) => RunStatus::Solved,
            (false, false, _) => RunStatus::Complete,
            (false, true, true) => RunStatus::BudgetExhausted,
            (false, true, false) => RunStatus::StrategyExhausted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IgrMeta {
    pub ideas: usize,
    pub chain_length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MctsMeta {
    pub expansion_rate: usize,
    pub exploration: f64,
}

/// Contents of `run.json`. Holds nothing machine- or time-specific so
/// that repeated runs produce identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub generator: String,
    pub problem: ProblemSpec,
    pub strategy: StrategyKind,
    pub max_nodes: usize,
    pub seed: u64,
    pub backend: BackendKind,
    pub llm: LlmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub score_mode: ScoreMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landscape: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_guidance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub igr: Option<IgrMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcts: Option<MctsMeta>,
    /// Template id, `supplied` for a user testbench, or `none`.
    pub testbench: String,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RunMeta {
    pub fn new(spec: &ProblemSpec, config: &RunConfig) -> Self {
        let remote = config.llm == LlmKind::Remote;
        Self {
            generator: format!("evolve {}", env!("CARGO_PKG_VERSION")),
            problem: spec.clone(),
            strategy: config.strategy,
            max_nodes: spec.max_nodes,
            seed: config.seed,
            backend: config.backend,
            llm: config.llm,
            model: remote.then(|| config.llm_config.model_name.clone()),
            temperature: remote.then_some(config.llm_config.temperature),
            score_mode: config.score_mode,
            landscape: None,
            mock_guidance: None,
            igr: (config.strategy == StrategyKind::Igr)
                .then_some(IgrMeta { ideas: config.igr.ideas, chain_length: config.igr.chain_length }),
            mcts: (config.strategy == StrategyKind::Mcts).then_some(MctsMeta {
                expansion_rate: config.mcts.expansion_rate,
                exploration: config.mcts.exploration,
            }),
            testbench: "none".into(),
            warnings: Vec::new(),
        }
    }
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub strategy: StrategyKind,
    pub task: Task,
    pub clock_period_ns: f64,
    pub seed: u64,
    pub status: RunStatus,
    pub node_count: usize,
    pub max_nodes: usize,
    pub best_score: Option<f64>,
    pub best_node: Option<NodeId>,
    /// Index of the first node scoring 1 (Gen only).
    pub nodes_to_solve: Option<usize>,
    /// Index of the first non-penalty node.
    pub first_valid_node: Option<usize>,
    pub penalty_nodes: usize,
    pub llm_calls: usize,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn nodes_to_solve(task: Task, archive: &Archive) -> Option<usize> {
    if !task.is_gen() {
        return None;
    }
    archive.nodes().iter().find(|n| n.score >= 1.0).map(|n| n.created_at_node_index)
}

pub fn summarize(
    meta: &RunMeta,
    archive: &Archive,
    usage: TokenUsage,
    llm_calls: usize,
    status: RunStatus,
    error: Option<String>,
) -> RunSummary {
    let spec = &meta.problem;
    RunSummary {
        problem: spec.name.clone(),
        strategy: meta.strategy,
        task: spec.task,
        clock_period_ns: spec.clock_period_ns,
        seed: meta.seed,
        status,
        node_count: archive.node_count(),
        max_nodes: meta.max_nodes,
        best_score: archive.best_score(),
        best_node: archive.best().map(|n| n.id),
        nodes_to_solve: nodes_to_solve(spec.task, archive),
        first_valid_node: archive
            .nodes()
            .iter()
            .find(|n| !is_penalty(n.score, spec.c_penalty))
            .map(|n| n.created_at_node_index),
        penalty_nodes: archive.nodes().iter().filter(|n| is_penalty(n.score, spec.c_penalty)).count(),
        llm_calls,
        prompt_tokens: usage.prompt_tokens,
        completion_tokens: usage.completion_tokens,
        total_tokens: usage.total(),
        error,
    }
}

/// Score against node index, one row per node.
pub fn scaling_csv(archive: &Archive) -> String {
    let mut out = String::from("node_index,node_id,score,best_score,tokens,cumulative_tokens\n");
    let mut cumulative = 0;
    for (n, best) in archive.nodes().iter().zip(archive.best_so_far()) {
        cumulative += n.tokens.total();
        let _ = writeln!(out, "{},{},{},{},{},{}", n.created_at_node_index, n.id, n.score, best, n.tokens.total(), cumulative);
    }
    out
}
