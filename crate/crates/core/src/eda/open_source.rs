// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::Command;

use super::process::{self, ProcOutput};
use super::synth_report::{parse_synth_report, AreaMode};
use super::{AdmissionGate, ToolConfig};
use crate::eval::{BackendError, EvalBackend, SimJob, SimOutcome, SynthJob, SynthOutcome};
use crate::stg::check_interface;

pub const SYNTH_SCRIPT_GENERIC: &str = include_str!("../../scripts/synth_generic.ys");
pub const SYNTH_SCRIPT_LIBERTY: &str = include_str!("../../scripts/synth_liberty.ys");

/// Fills `{{top}}` and `{{period_ps}}` in a synthesis script template.
pub fn render_synth_script(template: &str, top: &str, clock_period_ns: f64) -> String {
    template.replace("{{top}}", top).replace("{{period_ps}}", &format!("{}", (clock_period_ns * 1000.0).round() as u64))
}

/// Icarus Verilog for simulation, Yosys for synthesis.
pub struct OpenSourceBackend {
    tools: ToolConfig,
    gate: AdmissionGate,
}

impl OpenSourceBackend {
    /// Resolves the requested tools up front so a missing binary is a
    /// startup error rather than a per-candidate one.
    pub fn new(tools: &ToolConfig, need_sim: bool, need_synth: bool) -> Result<Self, BackendError> {
        let tools = tools.resolve(need_sim, need_synth)?;
        let gate = AdmissionGate::new(tools.parallel_limit);
        Ok(Self { tools, gate })
    }

    pub fn tools(&self) -> &ToolConfig {
        &self.tools
    }
}

fn combined(p: &ProcOutput) -> String {
    let mut s = p.stderr.clone();
    if !p.stdout.trim().is_empty() {
        if !s.is_empty() && !s.ends_with('\n') {
            s.push('\n');
        }
        s.push_str(&p.stdout);
    }
    s
}

fn last_error_line(log: &str) -> Option<String> {
    log.lines().rev().find(|l| l.starts_with("ERROR")).map(|l| l.trim().to_string())
}

impl EvalBackend for OpenSourceBackend {
    fn name(&self) -> &str {
        "open-source"
    }

    fn run_sim(&self, job: &SimJob<'_>) -> Result<SimOutcome, BackendError> {
        if let Some(ports) = job.expected_ports {
            if let Err(msg) = check_interface(job.code, job.top_module, ports) {
                return Ok(SimOutcome { stderr: msg, ..SimOutcome::default() });
            }
        }
        let _permit = self.gate.acquire();
        let mut compile = Command::new(&self.tools.iverilog);
        compile.args(["-g2005", "-s", "tb", "-o", "sim.vvp", "tb.v", "dut.v", "golden.v"]);
        let c = process::run(compile, job.dir, job.timeout, "iverilog")?;
        if !c.success() {
            return Ok(SimOutcome {
                compile_ok: false,
                timed_out: c.timed_out,
                stderr: combined(&c),
                elapsed_ms: c.elapsed_ms(),
                ..SimOutcome::default()
            });
        }
        let mut sim = Command::new(&self.tools.vvp);
        sim.args(["-n", "sim.vvp"]);
        let s = process::run(sim, job.dir, job.timeout, "vvp")?;
        Ok(SimOutcome {
            compile_ok: true,
            timed_out: s.timed_out,
            exit_ok: s.success(),
            stdout: s.stdout,
            stderr: s.stderr,
            elapsed_ms: c.elapsed.as_millis() as u64 + s.elapsed.as_millis() as u64,
        })
    }

    fn run_synth(&self, job: &SynthJob<'_>) -> Result<SynthOutcome, BackendError> {
        let (template, mode) = match &self.tools.liberty {
            Some(lib) => {
                let dst = job.dir.join("cells.lib");
                fs::copy(lib, &dst).map_err(|e| BackendError::io(format!("copying {}", lib.display()), e))?;
                (SYNTH_SCRIPT_LIBERTY, AreaMode::Liberty)
            }
            None => (SYNTH_SCRIPT_GENERIC, AreaMode::GateEquivalent),
        };
        let script = render_synth_script(template, job.top_module, job.clock_period_ns);
        let script_path = job.dir.join("synth.ys");
        fs::write(&script_path, script).map_err(|e| BackendError::io("writing synth.ys", e))?;
        let log_path = job.dir.join("synth.log");
        let _ = fs::remove_file(&log_path);

        let _permit = self.gate.acquire();
        let mut cmd = Command::new(&self.tools.yosys);
        cmd.args(["-q", "-l", "synth.log", "-s", "synth.ys"]);
        let out = process::run(cmd, job.dir, job.timeout, "yosys")?;
        let log = read_log(&log_path).unwrap_or_default();
        let log = if log.is_empty() { combined(&out) } else { log };

        if out.timed_out {
            return Ok(SynthOutcome::Failed { message: "timeout".into(), timed_out: true, log, elapsed_ms: out.elapsed_ms() });
        }
        if !out.success() {
            let message = last_error_line(&log)
                .or_else(|| last_error_line(&out.stderr))
                .unwrap_or_else(|| format!("yosys exited with {:?}", out.status));
            return Ok(SynthOutcome::Failed { message, timed_out: false, log, elapsed_ms: out.elapsed_ms() });
        }
        let report = parse_synth_report(&log, job.top_module, mode)
            .map_err(|e| BackendError::Report { what: "synthesis log".into(), detail: e.to_string() })?;
        let mut warnings = report.warnings;
        let meets_timing = match report.delay_ps {
            Some(d) => d <= job.clock_period_ns * 1000.0,
            None => {
                let w = "no critical path reported; timing assumed met".to_string();
                log::warn!("{w}");
                warnings.push(w);
                true
            }
        };
        Ok(SynthOutcome::Done { area_um2: report.area, meets_timing, log, warnings, elapsed_ms: out.elapsed_ms() })
    }
}

fn read_log(path: &Path) -> Option<String> {
    fs::read(path).ok().map(|b| String::from_utf8_lossy(&b).into_owned())
}
