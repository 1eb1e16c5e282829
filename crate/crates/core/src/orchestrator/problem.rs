// SPDX-License-Identifier: Apache-2.0

//! Problem directories.
//!
//! ```text
//! problem.md     description given to the model
//! problem.json   task kind, top module, clock and overrides
//! golden.v       reference model, module <top>_ref
//! context.md     optional reference material for idea prompts
//! tb.v           optional testbench; replaces the generated one
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Directive, ProblemError, ProblemSpec, Task, DEFAULT_C_PENALTY, DEFAULT_ETA};
use crate::eda::Landscape;

pub const PROBLEM_MD: &str = "problem.md";
pub const PROBLEM_JSON: &str = "problem.json";
pub const GOLDEN_V: &str = "golden.v";
pub const CONTEXT_MD: &str = "context.md";
pub const TB_V: &str = "tb.v";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file} not found in {}", dir.display())]
    Missing { file: &'static str, dir: PathBuf },
    #[error("reading {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Invalid(#[from] ProblemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Gen,
    Opt,
}

/// On-disk shape of `problem.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: Option<String>,
    pub task: TaskKind,
    pub top_module: String,
    #[serde(default)]
    pub clock_period_ns: Option<f64>,
    #[serde(default)]
    pub directive: Option<Directive>,
    #[serde(default)]
    pub max_nodes: Option<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub c_penalty: Option<f64>,
    /// Synthetic landscape used with the synthetic backend, e.g. `hamming8`.
    #[serde(default)]
    pub landscape: Option<String>,
}

/// An ingested problem directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub dir: PathBuf,
    pub spec: ProblemSpec,
    /// Present when `golden.v` exists; `spec.golden_ref` holds the same text.
    pub golden_src: Option<String>,
    pub supplied_testbench: Option<String>,
    pub landscape: Option<Landscape>,
}

fn read_optional(path: &Path) -> Result<Option<String>, IngestError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(IngestError::Io { path: path.to_path_buf(), source: e }),
    }
}

fn read_required(dir: &Path, file: &'static str) -> Result<String, IngestError> {
    read_optional(&dir.join(file))?.ok_or_else(|| IngestError::Missing { file, dir: dir.to_path_buf() })
}

pub fn ingest_problem(dir: &Path) -> Result<Problem, IngestError> {
    let json_path = dir.join(PROBLEM_JSON);
    let raw = read_required(dir, PROBLEM_JSON)?;
    let file: ProblemFile =
        serde_json::from_str(&raw).map_err(|e| IngestError::Json { path: json_path, source: e })?;
    let description = read_required(dir, PROBLEM_MD)?;
    let golden_src = read_optional(&dir.join(GOLDEN_V))?;
    let context = read_optional(&dir.join(CONTEXT_MD))?.filter(|c| !c.trim().is_empty());
    let supplied_testbench = read_optional(&dir.join(TB_V))?;

    let name = file.name.clone().unwrap_or_else(|| {
        dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "problem".into())
    });
    let mut spec = ProblemSpec::new(name, description, file.top_module.trim());
    spec.task = match file.task {
        TaskKind::Gen => {
            if file.directive.is_some_and(|d| d != Directive::Balanced) {
                return Err(ProblemError::Invalid("a directive applies to opt tasks only".into()).into());
            }
            Task::Gen
        }
        TaskKind::Opt => Task::Opt { directive: file.directive.unwrap_or_default() },
    };
    if let Some(p) = file.clock_period_ns {
        spec.clock_period_ns = p;
    }
    if let Some(n) = file.max_nodes {
        spec.max_nodes = n;
    }
    spec.eta = file.eta.unwrap_or(DEFAULT_ETA);
    spec.c_penalty = file.c_penalty.unwrap_or(DEFAULT_C_PENALTY);
    spec.context = context;
    spec.golden_ref = golden_src.clone().unwrap_or_default();
    spec.validate()?;

    let landscape = file
        .landscape
        .as_deref()
        .map(str::parse::<Landscape>)
        .transpose()
        .map_err(ProblemError::Invalid)?;

    Ok(Problem { dir: dir.to_path_buf(), spec, golden_src, supplied_testbench, landscape })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, files: &[(&str, &str)]) {
        for (name, body) in files {
            fs::write(dir.join(name), body).unwrap();
        }
    }

    #[test]
    fn complete_directory() {
        let d = tempfile::tempdir().unwrap();
        write(
            d.path(),
            &[
                (PROBLEM_JSON, r#"{"task":"opt","top_module":"acc","clock_period_ns":4,"directive":"opt-area"}"#),
                (PROBLEM_MD, "Accumulate."),
                (GOLDEN_V, "module acc_ref(input clk, output y); endmodule"),
                (CONTEXT_MD, "notes"),
            ],
        );
        let p = ingest_problem(d.path()).unwrap();
        assert_eq!(p.spec.top_module, "acc");
        assert_eq!(p.spec.task, Task::Opt { directive: Directive::OptArea });
        assert_eq!(p.spec.clock_period_ns, 4.0);
        assert_eq!(p.spec.context.as_deref(), Some("notes"));
        assert!(p.golden_src.is_some() && p.supplied_testbench.is_none());
    }

    #[test]
    fn missing_problem_json_is_named() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), &[(PROBLEM_MD, "x")]);
        let err = ingest_problem(d.path()).unwrap_err();
        assert!(err.to_string().starts_with("problem.json not found"), "{err}");
    }

    #[test]
    fn rejects_bad_fields() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), &[(PROBLEM_MD, "x"), (PROBLEM_JSON, r#"{"task":"gen","top_module":"m","clok":3}"#)]);
        assert!(matches!(ingest_problem(d.path()), Err(IngestError::Json { .. })));
        write(d.path(), &[(PROBLEM_JSON, r#"{"task":"gen","top_module":"m","directive":"opt-area"}"#)]);
        assert!(matches!(ingest_problem(d.path()), Err(IngestError::Invalid(_))));
        write(d.path(), &[(PROBLEM_JSON, r#"{"task":"gen","top_module":"m","landscape":"maze"}"#)]);
        assert!(matches!(ingest_problem(d.path()), Err(IngestError::Invalid(_))));
    }
}
