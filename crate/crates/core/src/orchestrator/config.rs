// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Directive;
use crate::eda::Landscape;
use crate::eval::ScoreMode;
use crate::llm::{LlmConfig, RetryPolicy};
use crate::search::{IgrConfig, MctsConfig};
use crate::stg::StgConfig;

#[derive(Debug, Error, PartialEq)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

macro_rules! kebab_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
        #[serde(rename_all = "kebab-case")]
        pub enum $name { $($variant),+ }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }

        impl FromStr for $name {
            type Err = ConfigError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(ConfigError(format!(
                        concat!("unknown ", stringify!($name), " '{}' (expected one of: {})"),
                        other,
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

kebab_enum!(StrategyKind { Mcts => "mcts", Igr => "igr", Random => "random" });
kebab_enum!(BackendKind { OpenSource => "open-source", Synthetic => "synthetic" });
kebab_enum!(LlmKind { Remote => "remote", Mock => "mock" });

/// Everything that controls a run besides the problem itself.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub strategy: StrategyKind,
    /// Overrides the problem's node budget.
    pub max_nodes: Option<usize>,
    pub igr: IgrConfig,
    pub mcts: MctsConfig,
    /// One independent optimization run per period; empty means the
    /// problem's own clock.
    pub clock_sweep: Vec<f64>,
    pub seed: u64,
    pub backend: BackendKind,
    pub llm: LlmKind,
    pub llm_config: LlmConfig,
    /// Replay fixtures for the mock model.
    pub fixtures: Option<PathBuf>,
    /// Probability that the synthetic mock acts on listed failing bits.
    pub mock_guidance: f64,
    pub directive: Option<Directive>,
    pub score_mode: ScoreMode,
    /// Overrides the problem's synthetic landscape.
    pub landscape: Option<Landscape>,
    pub retry: RetryPolicy,
    pub stg: StgConfig,
    pub sim_timeout: Duration,
    pub synth_timeout: Duration,
    pub out_dir: Option<PathBuf>,
    /// Continue from the archive already in `out_dir`.
    pub resume: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::Mcts,
            max_nodes: None,
            igr: IgrConfig::default(),
            mcts: MctsConfig::default(),
            clock_sweep: Vec::new(),
            seed: 0,
            backend: BackendKind::OpenSource,
            llm: LlmKind::Remote,
            llm_config: LlmConfig::default(),
            fixtures: None,
            mock_guidance: 0.0,
            directive: None,
            score_mode: ScoreMode::FineGrained,
            landscape: None,
            retry: RetryPolicy::default(),
            stg: StgConfig::default(),
            sim_timeout: Duration::from_secs(60),
            synth_timeout: Duration::from_secs(300),
            out_dir: None,
            resume: false,
        }
    }
}

impl RunConfig {
    /// Checks the strategy-specific fields; returns warnings that do not
    /// prevent a run.
    pub fn validate(&self, budget: usize) -> Result<Vec<String>, ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        let mut warnings = Vec::new();
        if budget == 0 {
            return err("max_nodes must be at least 1".into());
        }
        match self.strategy {
            StrategyKind::Igr => {
                if self.igr.ideas == 0 || self.igr.chain_length == 0 {
                    return err("igr needs k >= 1 and m >= 1".into());
                }
                if self.igr.budget() != budget {
                    warnings.push(format!(
                        "k*m = {}*{} = {} differs from max_nodes = {budget}",
                        self.igr.ideas,
                        self.igr.chain_length,
                        self.igr.budget()
                    ));
                }
            }
            StrategyKind::Mcts => {
                if self.mcts.expansion_rate == 0 {
                    return err("mcts expansion rate must be at least 1".into());
                }
                if !(self.mcts.exploration >= 0.0 && self.mcts.exploration.is_finite()) {
                    return err(format!("exploration constant {} must be finite and >= 0", self.mcts.exploration));
                }
            }
            StrategyKind::Random => {}
        }
        if let Some(p) = self.clock_sweep.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return err(format!("clock period {p} ns must be positive"));
        }
        if !(0.0..=1.0).contains(&self.mock_guidance) {
            return err(format!("mock guidance {} must lie in [0, 1]", self.mock_guidance));
        }
        if self.resume && self.out_dir.is_none() {
            return err("--resume needs an output directory".into());
        }
        Ok(warnings)
    }
}

/// Parses `3,4,5` or `3-7` (integer steps) into clock periods.
pub fn parse_clock_sweep(s: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError(format!("invalid clock sweep '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a == 0 || a > b {
                return Err(bad());
            }
            out.extend((a..=b).map(f64::from));
        } else {
            out.push(part.parse::<f64>().map_err(|_| bad())?);
        }
    }
    if out.is_empty() || out.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(bad());
    }
    Ok(out)
}
