// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, EvalBackend, EvalReport, SimJob, SynthJob, SynthOutcome};
use crate::domain::{
    score_generation, score_optimization, select_feedback, FailingVector, Feedback, ProblemSpec, TokenUsage,
};
use crate::stg::{parse_sim_log, Testbench};

/// How the pass rate feeds the Gen score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMode {
    /// Score is the fraction of passing vectors.
    #[default]
    FineGrained,
    /// Score is 1 when every vector passes and 0 otherwise; failing-vector
    /// detail is withheld.
    Binary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub sim_timeout: Duration,
    pub synth_timeout: Duration,
    pub score_mode: ScoreMode,
    /// Per-candidate directories are kept under this root; a temporary
    /// directory is used per candidate otherwise.
    pub scratch_root: Option<PathBuf>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            sim_timeout: Duration::from_secs(60),
            synth_timeout: Duration::from_secs(300),
            score_mode: ScoreMode::FineGrained,
            scratch_root: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub text: String,
    pub usage: TokenUsage,
}

/// Produces the natural-language design summary used in feedback.
pub trait Summarizer: Send + Sync {
    fn summarize(&self, code: &str, spec: &ProblemSpec) -> Summary;
}

/// Uses the leading lines of the candidate as its summary. No model calls.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstLinesSummarizer;

impl FirstLinesSummarizer {
    pub const LINES: usize = 40;
}

impl Summarizer for FirstLinesSummarizer {
    fn summarize(&self, code: &str, _spec: &ProblemSpec) -> Summary {
        let text: Vec<&str> = code.lines().take(Self::LINES).collect();
        Summary { text: text.join("\n"), usage: TokenUsage::default() }
    }
}

/// What every candidate of a run is evaluated against.
#[derive(Clone, Debug)]
pub struct EvalTarget {
    pub spec: ProblemSpec,
    pub testbench: Testbench,
    pub golden_src: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub score: f64,
    pub feedback: Feedback,
    pub report: EvalReport,
    pub summary_usage: TokenUsage,
}

pub struct Evaluator {
    backend: Arc<dyn EvalBackend>,
    summarizer: Arc<dyn Summarizer>,
    config: EvalConfig,
}

const STDERR_LINES: usize = 30;
const STDERR_CHARS: usize = 4000;

/// First lines of tool output, bounded in size.
pub fn excerpt(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines().take(STDERR_LINES) {
        if out.len() + line.len() + 1 > STDERR_CHARS {
            break;
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}

impl Evaluator {
    pub fn new(backend: Arc<dyn EvalBackend>, summarizer: Arc<dyn Summarizer>, config: EvalConfig) -> Self {
        Self { backend, summarizer, config }
    }

    pub fn backend(&self) -> &dyn EvalBackend {
        self.backend.as_ref()
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }

    /// Evaluates `code`. `label` names the candidate's scratch directory.
    pub fn evaluate(&self, target: &EvalTarget, code: &str, label: &str) -> Result<Evaluation, BackendError> {
        let _tmp;
        let dir: PathBuf = match &self.config.scratch_root {
            Some(root) => {
                let d = root.join(label);
                fs::create_dir_all(&d).map_err(|e| BackendError::io(format!("creating {}", d.display()), e))?;
                d
            }
            None => {
                let t = tempfile::Builder::new()
                    .prefix("evolve-")
                    .tempdir()
                    .map_err(|e| BackendError::io("creating scratch directory", e))?;
                let d = t.path().to_path_buf();
                _tmp = t;
                d
            }
        };
        let out = self.evaluate_in(target, code, &dir)?;
        write(&dir.join("report.json"), &serde_json::to_string_pretty(&out.report).expect("report serializes"))?;
        Ok(out)
    }

    fn evaluate_in(&self, target: &EvalTarget, code: &str, dir: &Path) -> Result<Evaluation, BackendError> {
        let spec = &target.spec;
        write(&dir.join("dut.v"), code)?;
        write(&dir.join("golden.v"), &target.golden_src)?;
        write(&dir.join("tb.v"), target.testbench.source())?;

        let bundle = target.testbench.bundle();
        let sim = self.backend.run_sim(&SimJob {
            dir,
            code,
            top_module: &spec.top_module,
            expected_ports: bundle.map(|b| b.ports.as_slice()),
            timeout: self.config.sim_timeout,
        })?;
        write(&dir.join("sim.log"), &format!("{}{}", sim.stdout, sim.stderr))?;

        let log = parse_sim_log(&sim.stdout);
        let mut report = EvalReport {
            compile_ok: sim.compile_ok,
            timed_out: sim.timed_out,
            sim_ok: sim.compile_ok && !sim.timed_out && sim.exit_ok && log.sim_ok,
            stderr_excerpt: excerpt(&sim.stderr),
            wall_time_ms: sim.elapsed_ms,
            ..EvalReport::default()
        };
        if sim.timed_out {
            report.failure = Some("timeout".into());
        }
        if report.sim_ok {
            report.pass = log.pass;
            report.total = log.total;
            report.cycles = log.cycles;
            report.failing_vectors = log
                .failures
                .iter()
                .map(|f| FailingVector {
                    time: f.time,
                    signal: f.signal.clone(),
                    inputs: bundle
                        .and_then(|b| b.vector_at_time(f.time))
                        .map(|(_, v)| v.describe())
                        .unwrap_or_default(),
                    expected: f.expected.clone(),
                    observed: f.observed.clone(),
                })
                .collect();
            if self.config.score_mode == ScoreMode::Binary && report.pass < report.total {
                report.pass = 0;
                report.failing_vectors.clear();
            }
        }

        let c_penalty = spec.c_penalty;
        let score = if spec.task.is_gen() {
            score_generation(report.pass, report.total, report.sim_ok, c_penalty).unwrap_or(c_penalty)
        } else {
            self.opt_score(spec, code, dir, &mut report)?
        };

        let summary = if crate::domain::is_penalty(score, c_penalty) {
            Summary::default()
        } else {
            self.summarizer.summarize(code, spec)
        };
        let feedback = select_feedback(spec.task, score, c_penalty, &report, &summary.text);
        Ok(Evaluation { score, feedback, report, summary_usage: summary.usage })
    }

    fn opt_score(
        &self,
        spec: &ProblemSpec,
        code: &str,
        dir: &Path,
        report: &mut EvalReport,
    ) -> Result<f64, BackendError> {
        let penalty = spec.c_penalty;
        let all_pass = report.sim_ok && report.total > 0 && report.pass == report.total;
        if !all_pass {
            return Ok(penalty);
        }
        let Some(cycles) = report.cycles else {
            return Err(BackendError::Report {
                what: "simulation log".into(),
                detail: "testbench printed STG_RESULT but no STG_CYCLES line".into(),
            });
        };
        let latency = cycles as f64 * spec.clock_period_ns;
        report.latency_ns = Some(latency);

        let synth = self.backend.run_synth(&SynthJob {
            dir,
            code,
            top_module: &spec.top_module,
            clock_period_ns: spec.clock_period_ns,
            timeout: self.config.synth_timeout,
        })?;
        match synth {
            SynthOutcome::Failed { message, timed_out, log, elapsed_ms } => {
                write(&dir.join("synth.log"), &log)?;
                report.wall_time_ms += elapsed_ms;
                report.failure =
                    Some(if timed_out { "timeout".into() } else { format!("synthesis failed: {message}") });
                report.stderr_excerpt = excerpt(&log);
                Ok(penalty)
            }
            SynthOutcome::Done { area_um2, meets_timing, log, warnings, elapsed_ms } => {
                write(&dir.join("synth.log"), &log)?;
                report.wall_time_ms += elapsed_ms;
                report.area_um2 = Some(area_um2);
                report.meets_timing = Some(meets_timing);
                report.warnings = warnings;
                if !meets_timing {
                    report.failure = Some(format!("timing not met at {} ns clock period", spec.clock_period_ns));
                    return Ok(penalty);
                }
                match score_optimization(area_um2, latency, true, spec.eta, penalty) {
                    Ok(s) => Ok(s),
                    Err(e) => {
                        report.failure = Some(e.to_string());
                        Ok(penalty)
                    }
                }
            }
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), BackendError> {
    fs::write(path, contents).map_err(|e| BackendError::io(format!("writing {}", path.display()), e))
}
