// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File};
use std::io::{self, Read};
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use crate::eval::BackendError;

/// Output kept per stream; runaway simulations are truncated.
const MAX_CAPTURE: u64 = 1 << 20;

#[derive(Debug)]
pub struct ProcOutput {
    pub status: Option<ExitStatus>,
    pub timed_out: bool,
    pub stdout: String,
    pub stderr: String,
    pub elapsed: Duration,
}

impl ProcOutput {
    pub fn success(&self) -> bool {
        !self.timed_out && self.status.is_some_and(|s| s.success())
    }

    pub fn elapsed_ms(&self) -> u64 {
        self.elapsed.as_millis() as u64
    }
}

fn read_capped(path: &Path) -> io::Result<String> {
    let mut buf = Vec::new();
    File::open(path)?.take(MAX_CAPTURE).read_to_end(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

/// Runs `cmd` in `cwd`, capturing output to `<tag>.stdout` / `<tag>.stderr`
/// there, and kills it after `timeout`.
pub fn run(mut cmd: Command, cwd: &Path, timeout: Duration, tag: &str) -> Result<ProcOutput, BackendError> {
    let out_path = cwd.join(format!("{tag}.stdout"));
    let err_path = cwd.join(format!("{tag}.stderr"));
    let out = File::create(&out_path).map_err(|e| BackendError::io(format!("creating {}", out_path.display()), e))?;
    let err = File::create(&err_path).map_err(|e| BackendError::io(format!("creating {}", err_path.display()), e))?;
    let program = cmd.get_program().to_string_lossy().into_owned();
    cmd.current_dir(cwd).stdin(Stdio::null()).stdout(out).stderr(err);

    let start = Instant::now();
    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => BackendError::ToolNotFound { tool: program.clone(), detail: e.to_string() },
        _ => BackendError::io(format!("spawning {program}"), e),
    })?;
    let (status, timed_out) = match child.wait_timeout(timeout).map_err(|e| BackendError::io("waiting for tool", e))? {
        Some(s) => (Some(s), false),
        None => {
            let _ = child.kill();
            let _ = child.wait();
            (None, true)
        }
    };
    let elapsed = start.elapsed();
    let stdout = read_capped(&out_path).map_err(|e| BackendError::io("reading tool stdout", e))?;
    let stderr = read_capped(&err_path).map_err(|e| BackendError::io("reading tool stderr", e))?;
    let _ = fs::remove_file(&out_path);
    let _ = fs::remove_file(&err_path);
    Ok(ProcOutput { status, timed_out, stdout, stderr, elapsed })
}
