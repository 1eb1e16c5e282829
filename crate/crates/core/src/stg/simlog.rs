// SPDX-License-Identifier: Apache-2.0

//! Parsing of the testbench output protocol.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimFailure {
    pub time: u64,
    pub signal: String,
    pub expected: String,
    pub observed: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimLog {
    pub pass: u64,
    pub total: u64,
    pub sim_ok: bool,
    pub cycles: Option<u64>,
    pub failures: Vec<SimFailure>,
}

impl SimLog {
    /// Pass rate, or `None` when the run produced no usable summary.
    pub fn pass_rate(&self) -> Option<f64> {
        (self.sim_ok && self.total > 0).then(|| self.pass as f64 / self.total as f64)
    }
}

fn result_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^STG_RESULT pass=(\d+) total=(\d+)$").unwrap())
}

fn fail_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^STG_FAIL t=(\d+) sig=(\S+) exp=(\S+) got=(\S+)$").unwrap())
}

fn cycles_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^STG_CYCLES n=(\d+)$").unwrap())
}

/// Extracts the summary, cycle count and failure lines from simulator stdout.
///
/// `sim_ok` is true only when exactly one well-formed `STG_RESULT` line is
/// present with `0 < total` and `pass <= total`.
pub fn parse_sim_log(stdout: &str) -> SimLog {
    let mut log = SimLog::default();
    let mut results = Vec::new();
    for raw in stdout.lines() {
        let line = raw.trim();
        if line.starts_with("STG_RESULT") {
            results.push(result_re().captures(line).and_then(|c| {
                Some((c[1].parse::<u64>().ok()?, c[2].parse::<u64>().ok()?))
            }));
        } else if let Some(c) = fail_re().captures(line) {
            if let Ok(time) = c[1].parse() {
                log.failures.push(SimFailure {
                    time,
                    signal: c[2].to_string(),
                    expected: c[3].to_string(),
                    observed: c[4].to_string(),
                });
            }
        } else if let Some(c) = cycles_re().captures(line) {
            log.cycles = c[1].parse().ok();
        }
    }
    if let [Some((pass, total))] = results[..] {
        log.pass = pass;
        log.total = total;
        log.sim_ok = total > 0 && pass <= total;
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn summary_examples() {
        let log = parse_sim_log("VCD info\nSTG_RESULT pass=38 total=40\n");
        assert_eq!((log.pass, log.total, log.sim_ok), (38, 40, true));
        assert_eq!(log.pass_rate(), Some(0.95));
        assert_eq!(parse_sim_log("STG_RESULT pass=40 total=40").pass_rate(), Some(1.0));
        assert!(!parse_sim_log("").sim_ok);
    }

    #[test]
    fn malformed_or_repeated_summary_fails() {
        assert!(!parse_sim_log("STG_RESULT pass=x total=40\n").sim_ok);
        assert!(!parse_sim_log("STG_RESULT pass=41 total=40\n").sim_ok);
        assert!(!parse_sim_log("STG_RESULT pass=0 total=0\n").sim_ok);
        assert!(!parse_sim_log("STG_RESULT pass=99999999999999999999999 total=1\n").sim_ok);
        assert!(!parse_sim_log("STG_RESULT pass=1 total=2\nSTG_RESULT pass=2 total=2\n").sim_ok);
    }

    #[test]
    fn failures_and_cycles() {
        let out = "STG_FAIL t=36 sig=q exp=0a got=0b\nSTG_FAIL t=46 sig=q exp=xx got=00\nSTG_CYCLES n=80\nSTG_RESULT pass=78 total=80\n";
        let log = parse_sim_log(out);
        assert_eq!(log.cycles, Some(80));
        assert_eq!(log.failures.len(), 2);
        assert_eq!(log.failures[1], SimFailure { time: 46, signal: "q".into(), expected: "xx".into(), observed: "00".into() });
    }

    proptest! {
        #[test]
        fn pass_rate_is_exact_ratio(total in 1u64..1_000_000, frac in 0.0f64..=1.0) {
            let pass = ((total as f64) * frac).floor() as u64;
            let log = parse_sim_log(&format!("noise\nSTG_RESULT pass={pass} total={total}\n"));
            let rate = log.pass_rate().unwrap();
            prop_assert!((0.0..=1.0).contains(&rate));
            prop_assert_eq!(rate, pass as f64 / total as f64);
        }

        #[test]
        fn never_panics(s in ".{0,400}") {
            let _ = parse_sim_log(&s);
        }
    }
}
