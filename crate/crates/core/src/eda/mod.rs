// SPDX-License-Identifier: Apache-2.0

//! Evaluation backends: Icarus Verilog and Yosys driven as subprocesses, and
//! a synthetic landscape that needs no tools at all.

mod open_source;
mod process;
mod synth_report;
mod synthetic;

use std::env;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};

pub use open_source::{render_synth_script, OpenSourceBackend, SYNTH_SCRIPT_GENERIC, SYNTH_SCRIPT_LIBERTY};
pub use synth_report::{gate_equivalents, parse_synth_report, AreaMode, ReportError, SynthReport};
pub use synthetic::{parse_candidate, render_candidate, Landscape, SyntheticBackend};

use crate::eval::BackendError;

pub const ENV_IVERILOG: &str = "EVOLVE_IVERILOG";
pub const ENV_VVP: &str = "EVOLVE_VVP";
pub const ENV_YOSYS: &str = "EVOLVE_YOSYS";
pub const ENV_LIBERTY: &str = "EVOLVE_LIBERTY";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToolConfig {
    pub iverilog: PathBuf,
    pub vvp: PathBuf,
    pub yosys: PathBuf,
    /// Cell library; area falls back to gate equivalents without one.
    pub liberty: Option<PathBuf>,
    pub parallel_limit: usize,
}

/// Looks `name` up on `PATH`, or checks it directly when it has a directory part.
pub fn find_executable(name: &Path) -> Option<PathBuf> {
    if name.components().count() > 1 {
        return name.is_file().then(|| name.to_path_buf());
    }
    env::split_paths(&env::var_os("PATH")?).map(|d| d.join(name)).find(|p| p.is_file())
}

impl ToolConfig {
    /// Tool paths from the environment overrides, else the usual names.
    /// Yosys falls back to the `yowasp-yosys` distribution.
    pub fn from_env() -> Self {
        let var = |k: &str| env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
        let yosys = var(ENV_YOSYS).unwrap_or_else(|| {
            if find_executable(Path::new("yosys")).is_some() {
                PathBuf::from("yosys")
            } else {
                PathBuf::from("yowasp-yosys")
            }
        });
        Self {
            iverilog: var(ENV_IVERILOG).unwrap_or_else(|| "iverilog".into()),
            vvp: var(ENV_VVP).unwrap_or_else(|| "vvp".into()),
            yosys,
            liberty: var(ENV_LIBERTY),
            parallel_limit: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }

    /// Resolves the requested tools, failing on the first missing one.
    pub fn resolve(&self, need_sim: bool, need_synth: bool) -> Result<ToolConfig, BackendError> {
        let find = |p: &Path, var: &str| {
            find_executable(p).ok_or_else(|| BackendError::ToolNotFound {
                tool: p.display().to_string(),
                detail: format!("not on PATH; set {var} to override"),
            })
        };
        let mut out = self.clone();
        if need_sim {
            out.iverilog = find(&self.iverilog, ENV_IVERILOG)?;
            out.vvp = find(&self.vvp, ENV_VVP)?;
        }
        if need_synth {
            out.yosys = find(&self.yosys, ENV_YOSYS)?;
        }
        if let Some(lib) = &self.liberty {
            if !lib.is_file() {
                return Err(BackendError::Config(format!("liberty file {} does not exist", lib.display())));
            }
        }
        Ok(out)
    }
}

/// Counting semaphore bounding concurrent tool invocations.
#[derive(Debug)]
pub struct AdmissionGate {
    limit: usize,
    in_use: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a> {
    gate: &'a AdmissionGate,
}

impl AdmissionGate {
    pub fn new(limit: usize) -> Self {
        Self { limit: limit.max(1), in_use: Mutex::new(0), freed: Condvar::new() }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_use.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.limit {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        Permit { gate: self }
    }

    pub fn in_use(&self) -> usize {
        *self.in_use.lock().unwrap_or_else(|e| e.into_inner())
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.gate.in_use.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.gate.freed.notify_one();
    }
}
