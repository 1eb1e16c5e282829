// SPDX-License-Identifier: Apache-2.0

//! Runs: problem ingestion, component wiring, the search loop,
//! checkpointing and reports.

mod config;
mod engine;
mod problem;
mod report;
mod store;

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::domain::{Archive, ProblemSpec, Task, TokenUsage};
use crate::eda::{Landscape, OpenSourceBackend, SyntheticBackend, ToolConfig};
use crate::eval::{BackendError, EvalBackend, EvalConfig, EvalTarget, Evaluator};
use crate::llm::{LanguageModel, LlmError, LlmSummarizer, MeteredModel, MockMode, RemoteClient, ReplayMock, SyntheticMutator};
use crate::search::{IgrStrategy, MctsStrategy, RandomParentStrategy, SearchError, Strategy};
use crate::stg::{testbench_from_golden, StgError, Testbench};

pub use config::{parse_clock_sweep, BackendKind, ConfigError, LlmKind, RunConfig, StrategyKind};
pub use engine::Engine;
pub use problem::{ingest_problem, IngestError, Problem, ProblemFile, TaskKind};
pub use report::{nodes_to_solve, scaling_csv, summarize, IgrMeta, MctsMeta, RunMeta, RunStatus, RunSummary};
pub use store::{
    read_json, read_jsonl, write_json, Checkpoint, Metered, NoSink, RunDir, RunSink, CANDIDATES_DIR, CHAINS_JSONL,
    NODES_JSONL, RUN_JSON, SCALING_CSV, SUMMARY_JSON, TESTBENCH_V, TREE_JSON, USAGE_JSONL,
};

/// Distinct exit codes of the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const UNSOLVED: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const BACKEND: i32 = 4;
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("testbench generation failed: {0}")]
    Stg(#[from] StgError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("language model: {0}")]
    Llm(#[from] LlmError),
    #[error("search state: {0}")]
    Search(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl From<SearchError> for RunError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Llm(e) => RunError::Llm(e),
            SearchError::Restore(m) => RunError::Search(m),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Ingest(_) | RunError::Stg(_) => exit::CONFIG,
            RunError::Backend(BackendError::Config(_)) => exit::CONFIG,
            RunError::Llm(LlmError::Config(_)) => exit::CONFIG,
            _ => exit::BACKEND,
        }
    }

    fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> RunError {
        let context = context.into();
        move |source| RunError::Io { context, source }
    }
}

/// Result of one run (one clock period of a sweep).
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub archive: Archive,
    pub out_dir: Option<PathBuf>,
}

/// Seeds for the synthetic landscape and the mock mutator must differ, or
/// the mutator's first candidate would be the landscape's optimum.
const MUTATOR_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn default_landscape(task: Task) -> Landscape {
    match task {
        Task::Gen => Landscape::Hamming { bits: 8 },
        Task::Opt { .. } => Landscape::AreaLatency { bits: 8 },
    }
}

/// Testbench plus reference text for the open-source backend.
pub fn build_target(problem: &Problem, spec: &ProblemSpec, config: &RunConfig) -> Result<(EvalTarget, String), RunError> {
    if config.backend == BackendKind::Synthetic {
        let tb = Testbench::Supplied { source: String::new() };
        return Ok((EvalTarget { spec: spec.clone(), testbench: tb, golden_src: String::new() }, "none".into()));
    }
    let golden = problem.golden_src.clone().unwrap_or_default();
    if let Some(tb) = &problem.supplied_testbench {
        let target = EvalTarget { spec: spec.clone(), testbench: Testbench::Supplied { source: tb.clone() }, golden_src: golden };
        return Ok((target, "supplied".into()));
    }
    if problem.golden_src.is_none() {
        return Err(ConfigError(format!(
            "{} has no golden.v: testbench generation needs an executable reference model; supply tb.v to use your own testbench",
            problem.dir.display()
        ))
        .into());
    }
    let bundle = testbench_from_golden(&golden, &spec.top_module, spec.clock_period_ns, &config.stg)?;
    let version = crate::stg::GENERATOR_VERSION.to_string();
    Ok((EvalTarget { spec: spec.clone(), testbench: Testbench::Generated(Box::new(bundle)), golden_src: golden }, version))
}

pub fn build_model(config: &RunConfig, landscape: Landscape) -> Result<Arc<dyn LanguageModel>, RunError> {
    Ok(match (config.llm, &config.fixtures, config.backend) {
        (LlmKind::Remote, ..) => Arc::new(RemoteClient::new(config.llm_config.clone())?),
        (LlmKind::Mock, Some(path), _) => Arc::new(ReplayMock::from_file(path, MockMode::Strict)?),
        (LlmKind::Mock, None, BackendKind::Synthetic) => {
            Arc::new(SyntheticMutator::new(landscape.bits(), config.seed ^ MUTATOR_SEED_SALT).with_guidance(config.mock_guidance))
        }
        (LlmKind::Mock, None, BackendKind::OpenSource) => {
            return Err(ConfigError("the mock model needs --fixtures with the open-source backend".into()).into())
        }
    })
}

pub fn build_backend(config: &RunConfig, task: Task, landscape: Landscape) -> Result<Arc<dyn EvalBackend>, RunError> {
    Ok(match config.backend {
        BackendKind::Synthetic => Arc::new(SyntheticBackend::new(landscape, config.seed)),
        BackendKind::OpenSource => Arc::new(OpenSourceBackend::new(&ToolConfig::from_env(), true, task.is_opt())?),
    })
}

pub fn build_strategy(config: &RunConfig) -> Box<dyn Strategy> {
    match config.strategy {
        StrategyKind::Mcts => Box::new(MctsStrategy::new(config.mcts)),
        StrategyKind::Igr => Box::new(IgrStrategy::new(config.igr)),
        StrategyKind::Random => Box::new(RandomParentStrategy::new(config.seed)),
    }
}

/// The problem's spec with the run's overrides applied.
pub fn effective_spec(problem: &Problem, config: &RunConfig) -> Result<ProblemSpec, RunError> {
    let mut spec = problem.spec.clone();
    if let Some(n) = config.max_nodes {
        spec.max_nodes = n;
    }
    if let Some(d) = config.directive {
        match &mut spec.task {
            Task::Opt { directive } => *directive = d,
            Task::Gen => return Err(ConfigError("--directive applies to opt tasks only".into()).into()),
        }
    }
    spec.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(spec)
}

fn period_dir(root: &Path, period: f64) -> PathBuf {
    root.join(format!("clk_{period}ns"))
}

/// Runs the problem once, or once per clock period when a sweep is given.
pub fn execute(problem: &Problem, config: &RunConfig) -> Result<Vec<RunOutcome>, RunError> {
    let spec = effective_spec(problem, config)?;
    if config.clock_sweep.is_empty() {
        return Ok(vec![execute_one(problem, config, spec, config.out_dir.clone())?]);
    }
    if spec.task.is_gen() {
        return Err(ConfigError("a clock sweep applies to opt tasks only".into()).into());
    }
    let mut out = Vec::new();
    for &period in &config.clock_sweep {
        let mut s = spec.clone();
        s.clock_period_ns = period;
        let dir = config.out_dir.as_deref().map(|d| period_dir(d, period));
        out.push(execute_one(problem, config, s, dir)?);
    }
    Ok(out)
}

fn execute_one(
    problem: &Problem,
    config: &RunConfig,
    spec: ProblemSpec,
    out_dir: Option<PathBuf>,
) -> Result<RunOutcome, RunError> {
    let mut meta = RunMeta::new(&spec, config);
    meta.warnings = config.validate(spec.max_nodes)?;
    for w in &meta.warnings {
        log::warn!("{w}");
    }
    let landscape = config.landscape.or(problem.landscape).unwrap_or_else(|| default_landscape(spec.task));
    if config.backend == BackendKind::Synthetic {
        meta.landscape = Some(landscape.to_string());
    }

    if config.backend == BackendKind::Synthetic && config.llm == LlmKind::Mock && config.fixtures.is_none() {
        meta.mock_guidance = Some(config.mock_guidance);
    }
    let (target, tb_kind) = build_target(problem, &spec, config)?;
    meta.testbench = tb_kind;
    let model = build_model(config, landscape)?;
    let metered: Arc<Metered> = Arc::new(MeteredModel::new(model));
    let backend = build_backend(config, spec.task, landscape)?;

    let mut run_dir = None;
    let mut checkpoint = Checkpoint::default();
    if let Some(dir) = &out_dir {
        let (mut d, cp) = RunDir::open(dir, config.resume).map_err(RunError::io("opening run directory"))?;
        d.attach_usage(metered.clone());
        d.write_meta(&meta).map_err(RunError::io("writing run.json"))?;
        if config.backend == BackendKind::OpenSource {
            d.write_testbench(target.testbench.source()).map_err(RunError::io("writing testbench"))?;
        }
        checkpoint = cp;
        run_dir = Some(d);
    }

    let eval_config = EvalConfig {
        sim_timeout: config.sim_timeout,
        synth_timeout: config.synth_timeout,
        score_mode: config.score_mode,
        scratch_root: run_dir.as_ref().map(RunDir::candidates_dir),
    };
    let summarizer = Arc::new(LlmSummarizer::new(metered.clone() as Arc<dyn LanguageModel>, config.retry));
    let evaluator = Evaluator::new(backend, summarizer, eval_config);

    let mut strategy = build_strategy(config);
    let mut archive = Archive::from_nodes(checkpoint.nodes.iter().cloned());
    if !checkpoint.nodes.is_empty() {
        log::info!("resuming with {} archived nodes", checkpoint.nodes.len());
        strategy.restore(&checkpoint.nodes, &checkpoint.events)?;
    }

    let engine = Engine {
        target: &target,
        evaluator: &evaluator,
        llm: metered.as_ref(),
        policy: config.retry,
        max_nodes: spec.max_nodes,
    };
    let result = match run_dir.as_mut() {
        Some(d) => engine.run(strategy.as_mut(), &mut archive, d),
        None => engine.run(strategy.as_mut(), &mut archive, &mut NoSink),
    };

    let prior: TokenUsage =
        checkpoint.usage.iter().map(|r| TokenUsage::new(r.prompt_tokens, r.completion_tokens)).sum();
    let usage = prior + metered.total();
    let calls = checkpoint.usage.len() + metered.records().len();
    let (status, error) = match &result {
        Ok(s) => (*s, None),
        Err(e) => (RunStatus::Failed, Some(e.to_string())),
    };
    let summary = summarize(&meta, &archive, usage, calls, status, error);
    if let Some(d) = run_dir.as_mut() {
        d.write_final(&summary, &scaling_csv(&archive)).map_err(RunError::io("writing summary"))?;
    }
    result?;
    Ok(RunOutcome { summary, archive, out_dir })
}

/// Rebuilds `summary.json` and `scaling.csv` from a run directory.
pub fn report(dir: &Path) -> Result<RunSummary, RunError> {
    let meta: RunMeta = read_json(&dir.join(RUN_JSON)).map_err(RunError::io("reading run.json"))?;
    let nodes = read_jsonl(&dir.join(NODES_JSONL)).map_err(RunError::io("reading nodes.jsonl"))?;
    let usage: Vec<crate::llm::UsageRecord> =
        read_jsonl(&dir.join(USAGE_JSONL)).map_err(RunError::io("reading usage.jsonl"))?;
    let archive = Archive::from_nodes(nodes);
    let previous: Option<RunSummary> = read_json(&dir.join(SUMMARY_JSON)).ok();
    let status = match &previous {
        Some(s) if s.status == RunStatus::Failed && s.node_count == archive.node_count() => RunStatus::Failed,
        _ => RunStatus::infer(meta.problem.task, &archive, meta.max_nodes),
    };
    let error = previous.and_then(|s| s.error).filter(|_| status == RunStatus::Failed);
    let tokens = usage.iter().map(|r| TokenUsage::new(r.prompt_tokens, r.completion_tokens)).sum();
    let summary = summarize(&meta, &archive, tokens, usage.len(), status, error);
    write_json(&dir.join(SUMMARY_JSON), &summary).map_err(RunError::io("writing summary.json"))?;
    std::fs::write(dir.join(SCALING_CSV), scaling_csv(&archive)).map_err(RunError::io("writing scaling.csv"))?;
    Ok(summary)
}

/// Run directories under `dir`: the directory itself, or its `clk_*`
/// children after a clock sweep.
pub fn run_dirs(dir: &Path) -> io::Result<Vec<PathBuf>> {
    if dir.join(RUN_JSON).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.join(RUN_JSON).is_file())
        .collect();
    out.sort();
    Ok(out)
}
