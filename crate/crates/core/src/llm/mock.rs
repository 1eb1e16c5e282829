// SPDX-License-Identifier: Apache-2.0

//! Deterministic stand-ins for a remote model.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::prompts::ID_REFINE_DIFF;
use super::{word_count, Completion, LanguageModel, LlmError, PromptBundle, Purpose};
use crate::domain::TokenUsage;

/// Hex SHA-256 of the system and user text, separated by a NUL byte.
pub fn prompt_hash(system: &str, user: &str) -> String {
    let mut h = Sha256::new();
    h.update(system.as_bytes());
    h.update([0u8]);
    h.update(user.as_bytes());
    let mut out = String::with_capacity(64);
    for b in h.finalize().iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub hash: String,
    pub response: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MockMode {
    /// Unknown prompts are an error.
    Strict,
    /// Unknown prompts get this response, with word-count usage.
    Lenient(String),
}

#[derive(Debug, Default, Deserialize)]
struct FixtureFile {
    entries: Vec<ReplayFixture>,
}

/// Replays recorded responses keyed by [`prompt_hash`].
pub struct ReplayMock {
    entries: HashMap<String, ReplayFixture>,
    mode: MockMode,
    recorded: Mutex<Vec<PromptBundle>>,
}

impl ReplayMock {
    pub fn new(mode: MockMode) -> Self {
        Self { entries: HashMap::new(), mode, recorded: Mutex::new(Vec::new()) }
    }

    /// Loads `{"entries": [{hash, response, prompt_tokens, completion_tokens}]}`.
    pub fn from_file(path: &Path, mode: MockMode) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("reading fixtures {}: {e}", path.display())))?;
        let file: FixtureFile = serde_json::from_str(&text)
            .map_err(|e| LlmError::Config(format!("parsing fixtures {}: {e}", path.display())))?;
        let mut mock = Self::new(mode);
        for e in file.entries {
            mock.entries.insert(e.hash.clone(), e);
        }
        Ok(mock)
    }

    pub fn insert(&mut self, system: &str, user: &str, response: &str, usage: TokenUsage) {
        let hash = prompt_hash(system, user);
        self.entries.insert(
            hash.clone(),
            ReplayFixture {
                hash,
                response: response.to_string(),
                prompt_tokens: usage.prompt_tokens,
                completion_tokens: usage.completion_tokens,
            },
        );
    }

    /// Every prompt seen so far, in call order.
    pub fn recorded(&self) -> Vec<PromptBundle> {
        self.recorded.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

impl LanguageModel for ReplayMock {
    fn complete(&self, prompt: &PromptBundle) -> Result<Completion, LlmError> {
        self.recorded.lock().unwrap_or_else(|e| e.into_inner()).push(prompt.clone());
        let hash = prompt_hash(&prompt.system, &prompt.user);
        match (self.entries.get(&hash), &self.mode) {
            (Some(f), _) => Ok(Completion {
                text: f.response.clone(),
                usage: TokenUsage::new(f.prompt_tokens, f.completion_tokens),
            }),
            (None, MockMode::Strict) => Err(LlmError::NoFixture(hash)),
            (None, MockMode::Lenient(text)) => Ok(Completion {
                text: text.clone(),
                usage: TokenUsage::new(word_count(&prompt.system) + word_count(&prompt.user), word_count(text)),
            }),
        }
    }
}

fn bits_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^\s*bits\s*=\s*([01]+)\s*$").unwrap())
}

fn failing_bit_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^\s*t=\d+ sig=bit(\d+)\b").unwrap())
}

const IDEA_THEMES: &[&str] = &[
    "a fully pipelined datapath",
    "a single shared arithmetic unit with time multiplexing",
    "one-hot state encoding",
    "a carry-save accumulation tree",
    "a bit-serial implementation",
    "aggressive retiming around the critical path",
];

/// Mock model for the synthetic landscape. Candidates are `bits = ...`
/// blocks; refinements flip exactly one bit of the parent. By default the
/// bit is uniform and the feedback text is ignored. With guidance `g`, a
/// refinement whose prompt lists failing vectors (`sig=bitN`) flips one of
/// the listed bits with probability `g`. Usage is counted in words.
pub struct SyntheticMutator {
    width: usize,
    guidance: f64,
    state: Mutex<(ChaCha8Rng, usize)>,
}

impl SyntheticMutator {
    pub fn new(width: usize, seed: u64) -> Self {
        assert!(width > 0, "candidate width must be positive");
        Self { width, guidance: 0.0, state: Mutex::new((ChaCha8Rng::seed_from_u64(seed), 0)) }
    }

    pub fn with_guidance(mut self, guidance: f64) -> Self {
        assert!((0.0..=1.0).contains(&guidance), "guidance must lie in [0, 1]");
        self.guidance = guidance;
        self
    }

    fn pick_bit(&self, rng: &mut ChaCha8Rng, prompt: &str) -> usize {
        if self.guidance > 0.0 {
            let listed: Vec<usize> = failing_bit_re()
                .captures_iter(prompt)
                .filter_map(|c| c[1].parse().ok())
                .filter(|&i| i < self.width)
                .collect();
            if !listed.is_empty() && rng.random_bool(self.guidance) {
                return listed[rng.random_range(0..listed.len())];
            }
        }
        rng.random_range(0..self.width)
    }

    fn random_bits(&self, rng: &mut ChaCha8Rng) -> String {
        (0..self.width).map(|_| if rng.random::<bool>() { '1' } else { '0' }).collect()
    }

    fn respond(&self, prompt: &PromptBundle) -> String {
        let mut guard = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let (rng, ideas) = &mut *guard;
        let parent = bits_line_re()
            .captures(&prompt.user)
            .map(|c| c[1].to_string())
            .filter(|b| b.len() == self.width);
        match prompt.purpose {
            Purpose::IdeaGen => {
                *ideas += 1;
                let theme = IDEA_THEMES[rng.random_range(0..IDEA_THEMES.len())];
                format!("Idea {}: build the design around {theme}.", *ideas)
            }
            Purpose::Summary => {
                let ones = parent.as_deref().map(|p| p.matches('1').count()).unwrap_or(0);
                format!("A {}-bit candidate vector with {ones} bits set.", self.width)
            }
            Purpose::InitialCode => format!("```\nbits = {}\n```\n", self.random_bits(rng)),
            Purpose::Refine => {
                let Some(parent) = parent else {
                    return format!("```\nbits = {}\n```\n", self.random_bits(rng));
                };
                let i = self.pick_bit(rng, &prompt.user);
                let child: String = parent
                    .chars()
                    .enumerate()
                    .map(|(j, c)| if j == i { if c == '1' { '0' } else { '1' } } else { c })
                    .collect();
                if prompt.template_id == ID_REFINE_DIFF {
                    format!("<<<SEARCH\nbits = {parent}\n====\nbits = {child}\n>>>REPLACE\n")
                } else {
                    format!("```\nbits = {child}\n```\n")
                }
            }
        }
    }
}

impl LanguageModel for SyntheticMutator {
    fn complete(&self, prompt: &PromptBundle) -> Result<Completion, LlmError> {
        let text = self.respond(prompt);
        let usage = TokenUsage::new(word_count(&prompt.system) + word_count(&prompt.user), word_count(&text));
        Ok(Completion { text, usage })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Feedback, ProblemSpec};
    use crate::llm::{extract_code, prompts, BudgetInfo};

    #[test]
    fn hash_is_stable_hex() {
        let h = prompt_hash("a", "b");
        assert_eq!(h.len(), 64);
        assert_eq!(h, prompt_hash("a", "b"));
        assert_ne!(h, prompt_hash("a\0", "b"));
        assert_ne!(h, prompt_hash("", "a\0b"));
    }

    #[test]
    fn replay_strict_and_lenient() {
        let p = prompts::summary("module m; endmodule");
        let mut strict = ReplayMock::new(MockMode::Strict);
        assert!(matches!(strict.complete(&p), Err(LlmError::NoFixture(_))));
        strict.insert(&p.system, &p.user, "fixture reply", TokenUsage::new(11, 2));
        let out = strict.complete(&p).unwrap();
        assert_eq!(out.text, "fixture reply");
        assert_eq!(out.usage, TokenUsage::new(11, 2));
        assert_eq!(strict.recorded().len(), 2);

        let lenient = ReplayMock::new(MockMode::Lenient("canned".into()));
        assert_eq!(lenient.complete(&p).unwrap().text, "canned");
    }

    #[test]
    fn mutator_flips_one_bit() {
        let spec = ProblemSpec::new("p", "d", "top");
        let m = SyntheticMutator::new(8, 3);
        let b = prompts::refine(&spec, "bits = 00000000", 0.5, &Feedback::error("x"), BudgetInfo::default());
        for _ in 0..20 {
            let code = extract_code(&m.complete(&b).unwrap().text).unwrap();
            assert_eq!(code.matches('1').count(), 1, "{code}");
        }
        let d = prompts::refine_diff(&spec, "idea", "bits = 11111111", 0.5, &Feedback::error("x"), None, BudgetInfo::default());
        let text = m.complete(&d).unwrap().text;
        assert!(text.starts_with("<<<SEARCH\nbits = 11111111\n====\nbits = "));
    }

    #[test]
    fn guided_mutator_flips_a_listed_bit() {
        let spec = ProblemSpec::new("p", "d", "top");
        let fb = Feedback {
            kind: crate::domain::FeedbackKind::DesignSummary,
            text: "failing vectors:\n  t=5 sig=bit5 expected=1 got=0\n".into(),
            failing_vectors: Vec::new(),
        };
        let b = prompts::refine(&spec, "bits = 00000000", 0.875, &fb, BudgetInfo::default());
        let m = SyntheticMutator::new(8, 4).with_guidance(1.0);
        for _ in 0..20 {
            let code = extract_code(&m.complete(&b).unwrap().text).unwrap();
            assert_eq!(code.trim(), "bits = 00000100");
        }
        let blind = SyntheticMutator::new(8, 4);
        let flips: std::collections::BTreeSet<String> =
            (0..50).map(|_| extract_code(&blind.complete(&b).unwrap().text).unwrap()).collect();
        assert!(flips.len() > 1);
    }

    #[test]
    fn mutator_is_deterministic() {
        let spec = ProblemSpec::new("p", "d", "top");
        let b = prompts::initial_code(&spec, BudgetInfo::default());
        let run = || {
            let m = SyntheticMutator::new(16, 9);
            (0..5).map(|_| m.complete(&b).unwrap().text).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
