// SPDX-License-Identifier: Apache-2.0

//! Evolutionary search over HDL designs.
//!
//! A language model proposes Verilog candidates, an evaluator scores them
//! against a self-checking testbench (and, for optimization tasks, against
//! synthesized area and simulated latency), and a parent-selection strategy
//! decides which candidate to refine next. Two strategies are provided:
//! Monte Carlo tree search ([`search::mcts`]) and idea-guided refinement
//! ([`search::igr`]).
//!
//! The crate is organised bottom-up:
//!
//! - [`domain`]: nodes, scores, feedback, problem definitions and the archive.
//! - [`stg`]: structured testbench generation (port parsing, signal
//!   classification, stimulus planning, testbench emission, log parsing).
//! - [`eval`]: the evaluator and the backend seam it drives.
//! - [`eda`]: concrete backends (Icarus Verilog + Yosys subprocesses, and a
//!   synthetic landscape for offline testing).
//! - [`llm`]: prompt assembly, a chat-completion client and replay mocks.
//! - [`search`]: the strategies.
//! - [`orchestrator`]: the run loop, persistence and reporting.

pub mod domain;
pub mod eda;
pub mod eval;
pub mod llm;
pub mod orchestrator;
pub mod search;
pub mod stg;

pub use domain::{
    Archive, Directive, FailingVector, Feedback, FeedbackKind, Node, NodeId, ProblemSpec, Task,
    TokenUsage,
};
pub use eval::{EvalBackend, EvalReport, Evaluator};
