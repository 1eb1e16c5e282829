// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::score::{DEFAULT_C_PENALTY, DEFAULT_ETA};

/// What an optimization run should favour when it reports guidance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directive {
    #[default]
    Balanced,
    OptArea,
    OptCycle,
}

impl FromStr for Directive {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "balanced" => Ok(Directive::Balanced),
            "opt-area" | "opt_area" | "optarea" => Ok(Directive::OptArea),
            "opt-cycle" | "opt_cycle" | "optcycle" => Ok(Directive::OptCycle),
            other => Err(ProblemError::Invalid(format!("unknown directive '{other}'"))),
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Directive::Balanced => "balanced",
            Directive::OptArea => "opt-area",
            Directive::OptCycle => "opt-cycle",
        })
    }
}

/// Generation tasks chase functional correctness; optimization tasks chase
/// area-latency among functionally correct designs. Only optimization
/// carries a directive, so a generation task is always balanced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Task {
    Gen,
    Opt { directive: Directive },
}

impl Task {
    pub fn is_gen(&self) -> bool {
        matches!(self, Task::Gen)
    }

    pub fn is_opt(&self) -> bool {
        matches!(self, Task::Opt { .. })
    }

    pub fn directive(&self) -> Directive {
        match self {
            Task::Gen => Directive::Balanced,
            Task::Opt { directive } => *directive,
        }
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// A task as ingested from a problem directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub description: String,
    pub task: Task,
    /// Reference implementation, module `<top_module>_ref`.
    pub golden_ref: String,
    pub top_module: String,
    pub clock_period_ns: f64,
    pub max_nodes: usize,
    pub eta: f64,
    pub c_penalty: f64,
    /// Optional reference text injected into idea prompts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl ProblemSpec {
    /// A generation problem with the default budget and constants.
    pub fn new(name: impl Into<String>, description: impl Into<String>, top: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            task: Task::Gen,
            golden_ref: String::new(),
            top_module: top.into(),
            clock_period_ns: 10.0,
            max_nodes: 300,
            eta: DEFAULT_ETA,
            c_penalty: DEFAULT_C_PENALTY,
            context: None,
        }
    }

    pub fn golden_module(&self) -> String {
        format!("{}_ref", self.top_module)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let bad = |m: &str| Err(ProblemError::Invalid(m.to_string()));
        if self.top_module.trim().is_empty() {
            return bad("top module name is empty");
        }
        if self.max_nodes < 1 {
            return bad("max_nodes must be at least 1");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta must be a positive finite number");
        }
        if !(self.c_penalty < 0.0 && self.c_penalty.is_finite()) {
            return bad("c_penalty must be a negative finite number");
        }
        if !(self.clock_period_ns > 0.0 && self.clock_period_ns.is_finite()) {
            return bad("clock period must be positive");
        }
        Ok(())
    }
}
