// SPDX-License-Identifier: Apache-2.0

//! Tool-free backend over a fixed bitstring landscape.
//!
//! A candidate is a text block containing one line `bits = <N binary
//! digits>`. The backend emits the same log protocol as a generated
//! testbench, so the evaluator treats it like any simulator.
//!
//! - `hamming<N>`: bit i is one test vector that passes when it matches the
//!   target, so the pass rate is `(N - distance) / N`.
//! - `area-latency<N>`: every parseable candidate passes; area is
//!   `1000 + 250·popcount(x ^ area_target)` and cycles are
//!   `16 + 4·popcount(x ^ cycle_target)`.
//!
//! Targets are derived from the backend seed.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::eval::{BackendError, EvalBackend, SimJob, SimOutcome, SynthJob, SynthOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Landscape {
    Hamming { bits: usize },
    AreaLatency { bits: usize },
}

impl Landscape {
    pub fn bits(&self) -> usize {
        match *self {
            Landscape::Hamming { bits } | Landscape::AreaLatency { bits } => bits,
        }
    }
}

impl fmt::Display for Landscape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Landscape::Hamming { bits } => write!(f, "hamming{bits}"),
            Landscape::AreaLatency { bits } => write!(f, "area-latency{bits}"),
        }
    }
}

impl FromStr for Landscape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |digits: &str| -> Result<usize, String> {
            match digits.parse::<usize>() {
                Ok(n) if (1..=1024).contains(&n) => Ok(n),
                _ => Err(format!("landscape width must be 1..=1024, got '{digits}'")),
            }
        };
        if let Some(d) = s.strip_prefix("hamming") {
            Ok(Landscape::Hamming { bits: parse(d)? })
        } else if let Some(d) = s.strip_prefix("area-latency") {
            Ok(Landscape::AreaLatency { bits: parse(d)? })
        } else {
            Err(format!("unknown landscape '{s}' (expected hamming<N> or area-latency<N>)"))
        }
    }
}

fn bits_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^\s*bits\s*=\s*([01]+)\s*$").unwrap())
}

/// Reads the `bits = ...` line of a candidate.
pub fn parse_candidate(code: &str, width: usize) -> Result<Vec<bool>, String> {
    let caps = bits_re().captures(code).ok_or_else(|| "candidate:1: expected a line `bits = <binary digits>`".to_string())?;
    let digits = &caps[1];
    if digits.len() != width {
        return Err(format!("candidate: expected {width} bits, found {}", digits.len()));
    }
    Ok(digits.chars().map(|c| c == '1').collect())
}

pub fn render_candidate(bits: &[bool]) -> String {
    let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
    format!("bits = {s}\n")
}

fn distance(a: &[bool], b: &[bool]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

#[derive(Clone, Debug)]
pub struct SyntheticBackend {
    landscape: Landscape,
    seed: u64,
    target: Vec<bool>,
    area_target: Vec<bool>,
    cycle_target: Vec<bool>,
}

impl SyntheticBackend {
    pub fn new(landscape: Landscape, seed: u64) -> Self {
        let n = landscape.bits();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || (0..n).map(|_| rng.random::<bool>()).collect::<Vec<bool>>();
        let target = draw();
        let area_target = draw();
        let cycle_target = draw();
        Self { landscape, seed, target, area_target, cycle_target }
    }

    pub fn landscape(&self) -> Landscape {
        self.landscape
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The optimum: the Hamming target, or the area target.
    pub fn target(&self) -> &[bool] {
        match self.landscape {
            Landscape::Hamming { .. } => &self.target,
            Landscape::AreaLatency { .. } => &self.area_target,
        }
    }

    pub fn area(&self, bits: &[bool]) -> f64 {
        match self.landscape {
            Landscape::Hamming { .. } => 1000.0,
            Landscape::AreaLatency { .. } => 1000.0 + 250.0 * distance(bits, &self.area_target) as f64,
        }
    }

    pub fn cycles(&self, bits: &[bool]) -> u64 {
        match self.landscape {
            Landscape::Hamming { .. } => self.landscape.bits() as u64,
            Landscape::AreaLatency { .. } => 16 + 4 * distance(bits, &self.cycle_target),
        }
    }
}

impl EvalBackend for SyntheticBackend {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn run_sim(&self, job: &SimJob<'_>) -> Result<SimOutcome, BackendError> {
        let n = self.landscape.bits();
        let bits = match parse_candidate(job.code, n) {
            Ok(b) => b,
            Err(msg) => return Ok(SimOutcome { stderr: msg, ..SimOutcome::default() }),
        };
        let mut out = String::new();
        let mut pass = 0;
        for (i, (&got, &exp)) in bits.iter().zip(&self.target).enumerate() {
            let check = match self.landscape {
                Landscape::Hamming { .. } => exp,
                Landscape::AreaLatency { .. } => got,
            };
            if got == check {
                pass += 1;
            } else {
                out.push_str(&format!("STG_FAIL t={i} sig=bit{i} exp={} got={}\n", check as u8, got as u8));
            }
        }
        out.push_str(&format!("STG_CYCLES n={}\n", self.cycles(&bits)));
        out.push_str(&format!("STG_RESULT pass={pass} total={n}\n"));
        Ok(SimOutcome { compile_ok: true, timed_out: false, exit_ok: true, stdout: out, stderr: String::new(), elapsed_ms: 0 })
    }

    fn run_synth(&self, job: &SynthJob<'_>) -> Result<SynthOutcome, BackendError> {
        match parse_candidate(job.code, self.landscape.bits()) {
            Ok(bits) => {
                let area = self.area(&bits);
                Ok(SynthOutcome::Done {
                    area_um2: area,
                    meets_timing: true,
                    log: format!("synthetic area {area}\n"),
                    warnings: Vec::new(),
                    elapsed_ms: 0,
                })
            }
            Err(message) => Ok(SynthOutcome::Failed { log: message.clone(), message, timed_out: false, elapsed_ms: 0 }),
        }
    }
}
