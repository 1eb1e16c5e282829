// SPDX-License-Identifier: Apache-2.0

//! Candidate evaluation: compile and simulate through a backend, optionally
//! synthesize, and turn the raw results into a score and feedback.

mod evaluator;

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::FailingVector;
use crate::stg::Port;

pub use evaluator::{
    excerpt, Evaluation, EvalConfig, EvalTarget, Evaluator, FirstLinesSummarizer, ScoreMode, Summarizer, Summary,
};

/// Everything measured for one candidate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub compile_ok: bool,
    pub sim_ok: bool,
    #[serde(default)]
    pub timed_out: bool,
    pub pass: u64,
    pub total: u64,
    pub area_um2: Option<f64>,
    pub cycles: Option<u64>,
    pub latency_ns: Option<f64>,
    pub meets_timing: Option<bool>,
    /// First-line reason when the candidate was rejected.
    pub failure: Option<String>,
    pub stderr_excerpt: String,
    #[serde(default)]
    pub failing_vectors: Vec<FailingVector>,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub wall_time_ms: u64,
}

/// Infrastructure failure, as opposed to a candidate failing.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("{tool} not found: {detail}")]
    ToolNotFound { tool: String, detail: String },
    #[error("i/o error ({context}): {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("could not parse {what}: {detail}")]
    Report { what: String, detail: String },
    #[error("{0}")]
    Config(String),
}

impl BackendError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }
}

/// Simulation request. `dir` already holds `dut.v`, `golden.v` and `tb.v`.
#[derive(Clone, Copy, Debug)]
pub struct SimJob<'a> {
    pub dir: &'a Path,
    pub code: &'a str,
    pub top_module: &'a str,
    /// Interface the candidate must expose, when known.
    pub expected_ports: Option<&'a [Port]>,
    pub timeout: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimOutcome {
    pub compile_ok: bool,
    pub timed_out: bool,
    /// Simulator process exited with status zero.
    pub exit_ok: bool,
    pub stdout: String,
    /// Compiler or simulator diagnostics.
    pub stderr: String,
    pub elapsed_ms: u64,
}

/// Synthesis request. `dir` already holds `dut.v`.
#[derive(Clone, Copy, Debug)]
pub struct SynthJob<'a> {
    pub dir: &'a Path,
    pub code: &'a str,
    pub top_module: &'a str,
    pub clock_period_ns: f64,
    pub timeout: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SynthOutcome {
    Done { area_um2: f64, meets_timing: bool, log: String, warnings: Vec<String>, elapsed_ms: u64 },
    /// The tool rejected the candidate or timed out.
    Failed { message: String, timed_out: bool, log: String, elapsed_ms: u64 },
}

/// A simulation and synthesis provider. Implementations must be
/// deterministic for identical inputs, apart from reported elapsed time.
pub trait EvalBackend: Send + Sync {
    fn name(&self) -> &str;
    fn run_sim(&self, job: &SimJob<'_>) -> Result<SimOutcome, BackendError>;
    fn run_synth(&self, job: &SynthJob<'_>) -> Result<SynthOutcome, BackendError>;
}
