// SPDX-License-Identifier: Apache-2.0

//! Search/replace edit scripts.
//!
//! ```text
//! <<<SEARCH
//! assign y = a;
//! ====
//! assign y = a ^ b;
//! >>>REPLACE
//! ```
//!
//! Text outside blocks is ignored. Each search text must occur exactly once
//! in the code it is applied to.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub search: String,
    pub replace: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub hunks: Vec<Hunk>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EditError {
    #[error("malformed edit block: {0}")]
    Malformed(String),
    #[error("response contains no edit blocks")]
    NoBlocks,
    #[error("hunk {hunk}: empty search text")]
    EmptySearch { hunk: usize },
    #[error("hunk {hunk}: search text not found")]
    NotFound { hunk: usize },
    #[error("hunk {hunk}: ambiguous match (search text occurs {count} times)")]
    Ambiguous { hunk: usize, count: usize },
}

const OPEN: &str = "<<<SEARCH";
const SEP: &str = "====";
const CLOSE: &str = ">>>REPLACE";

enum State {
    Outside,
    Search(Vec<String>),
    Replace(Vec<String>, Vec<String>),
}

pub fn parse_edit_script(text: &str) -> Result<EditScript, EditError> {
    let mut hunks = Vec::new();
    let mut state = State::Outside;
    for (n, line) in text.lines().enumerate() {
        let marker = line.trim();
        state = match (state, marker) {
            (State::Outside, OPEN) => State::Search(Vec::new()),
            (State::Outside, _) => State::Outside,
            (State::Search(s), SEP) => State::Replace(s, Vec::new()),
            (State::Search(_), OPEN | CLOSE) => {
                return Err(EditError::Malformed(format!("line {}: expected '{SEP}'", n + 1)));
            }
            (State::Search(mut s), _) => {
                s.push(line.to_string());
                State::Search(s)
            }
            (State::Replace(s, r), CLOSE) => {
                hunks.push(Hunk { search: s.join("\n"), replace: r.join("\n") });
                State::Outside
            }
            (State::Replace(..), OPEN) => {
                return Err(EditError::Malformed(format!("line {}: expected '{CLOSE}'", n + 1)));
            }
            (State::Replace(s, mut r), _) => {
                r.push(line.to_string());
                State::Replace(s, r)
            }
        };
    }
    if !matches!(state, State::Outside) {
        return Err(EditError::Malformed("unterminated edit block".into()));
    }
    Ok(EditScript { hunks })
}

/// Occurrences of `needle` in `hay`, overlapping ones included.
fn occurrences(hay: &str, needle: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(i) = hay[from..].find(needle) {
        out.push(from + i);
        let step = hay[from + i..].chars().next().map_or(1, char::len_utf8);
        from += i + step;
        if from > hay.len() {
            break;
        }
    }
    out
}

pub fn apply_edits(parent_code: &str, script: &EditScript) -> Result<String, EditError> {
    let mut code = parent_code.to_string();
    for (i, h) in script.hunks.iter().enumerate() {
        let hunk = i + 1;
        if h.search.is_empty() {
            return Err(EditError::EmptySearch { hunk });
        }
        let found = occurrences(&code, &h.search);
        match found.len() {
            0 => return Err(EditError::NotFound { hunk }),
            1 => code.replace_range(found[0]..found[0] + h.search.len(), &h.replace),
            count => return Err(EditError::Ambiguous { hunk, count }),
        }
    }
    Ok(code)
}

/// Parses a model response and applies it; a response without any block is
/// an error here even though an empty script is a valid no-op.
pub fn apply_response(parent_code: &str, response: &str) -> Result<String, EditError> {
    let script = parse_edit_script(response)?;
    if script.hunks.is_empty() {
        return Err(EditError::NoBlocks);
    }
    apply_edits(parent_code, &script)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_count(hay: &str, needle: &str) -> usize {
        (0..=hay.len().saturating_sub(needle.len()))
            .filter(|&i| hay.is_char_boundary(i) && hay[i..].starts_with(needle))
            .count()
    }

    #[test]
    fn empty_script_is_identity() {
        assert_eq!(apply_edits("module m; endmodule", &EditScript::default()).unwrap(), "module m; endmodule");
    }

    #[test]
    fn single_hunk() {
        let code = "module m(input a, b, output y);\n  assign y = a;\nendmodule\n";
        let resp = "Here you go:\n<<<SEARCH\n  assign y = a;\n====\n  assign y = a ^ b;\n>>>REPLACE\nthanks";
        let out = apply_response(code, resp).unwrap();
        assert_eq!(out, "module m(input a, b, output y);\n  assign y = a ^ b;\nendmodule\n");
    }

    #[test]
    fn duplicated_line_is_ambiguous() {
        let code = "  q <= d;\n  q <= d;\n";
        assert_eq!(naive_count(code, "q <= d;"), 2);
        let err = apply_response(code, "<<<SEARCH\nq <= d;\n====\nq <= 0;\n>>>REPLACE").unwrap_err();
        assert_eq!(err, EditError::Ambiguous { hunk: 1, count: 2 });
        assert!(err.to_string().contains("ambiguous match"));
    }

    #[test]
    fn missing_and_malformed() {
        assert_eq!(apply_response("abc", "<<<SEARCH\nxyz\n====\n\n>>>REPLACE").unwrap_err(), EditError::NotFound { hunk: 1 });
        assert!(matches!(parse_edit_script("<<<SEARCH\na\n"), Err(EditError::Malformed(_))));
        assert!(matches!(parse_edit_script("<<<SEARCH\na\n>>>REPLACE"), Err(EditError::Malformed(_))));
        assert_eq!(apply_response("abc", "no blocks here"), Err(EditError::NoBlocks));
    }

    #[test]
    fn hunks_apply_in_order() {
        let script = EditScript {
            hunks: vec![
                Hunk { search: "a".into(), replace: "bc".into() },
                Hunk { search: "bcx".into(), replace: "y".into() },
            ],
        };
        assert_eq!(apply_edits("ax", &script).unwrap(), "y");
    }

    proptest! {
        #[test]
        fn occurrence_count_matches_naive(hay in "[ab]{0,24}", needle in "[ab]{1,4}") {
            prop_assert_eq!(occurrences(&hay, &needle).len(), naive_count(&hay, &needle));
        }

        #[test]
        fn unique_replacement_matches_naive(prefix in "[a-z ]{0,20}", suffix in "[a-z ]{0,20}", new in "[A-Z]{0,8}") {
            let needle = "#MARK#";
            let code = format!("{prefix}{needle}{suffix}");
            let script = EditScript { hunks: vec![Hunk { search: needle.into(), replace: new.clone() }] };
            prop_assert_eq!(apply_edits(&code, &script).unwrap(), format!("{prefix}{new}{suffix}"));
        }

        #[test]
        fn parse_never_panics(s in "(<<<SEARCH|====|>>>REPLACE|[a-z ]{0,8}|\n){0,30}") {
            if let Ok(script) = parse_edit_script(&s) {
                let _ = apply_edits("abc def", &script);
            }
        }
    }
}
