// SPDX-License-Identifier: Apache-2.0

//! Name-based signal classification.
//!
//! Rules are tried in order and the first match wins (identifiers compared
//! case-insensitively):
//!
//! 1. clock/reset: an underscore-delimited `clk`/`clock` token anywhere in
//!    the name, or a name starting with `rst`/`reset` (optionally followed by
//!    `n`, `_n`, `_p`, or an underscore suffix);
//! 2. control: an underscore-delimited token from [`CONTROL_TOKENS`], or any
//!    other 1-bit input;
//! 3. datapath: everything else.
//!
//! Outputs are always `Observed`.

use std::sync::OnceLock;

use regex::Regex;

use super::{Category, Direction, Port};

pub const CONTROL_TOKENS: &[&str] = &[
    "valid", "ready", "en", "enable", "start", "done", "sel", "mode", "we", "re", "req", "ack", "flush", "stall",
];

fn clock_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(^|_)(clk|clock)(_|$)").unwrap())
}

fn reset_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(rst|reset)(n|_n|_p)?(_|$)").unwrap())
}

pub fn is_clock_name(name: &str) -> bool {
    clock_re().is_match(name)
}

pub fn is_reset_name(name: &str) -> bool {
    !is_clock_name(name) && reset_re().is_match(name)
}

/// Resets named with an `_n` suffix (or `rstn`/`resetn`) are active-low.
pub fn is_active_low_reset(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower.ends_with("_n") || lower == "rstn" || lower == "resetn"
}

pub fn classify_port(port: &Port) -> Category {
    if port.direction != Direction::In {
        return Category::Observed;
    }
    if is_clock_name(&port.name) || is_reset_name(&port.name) {
        return Category::ClockReset;
    }
    let lower = port.name.to_ascii_lowercase();
    if lower.split('_').any(|tok| CONTROL_TOKENS.contains(&tok)) || port.width == 1 {
        return Category::Control;
    }
    Category::Datapath
}

pub fn classify_ports(ports: &[Port]) -> Vec<Port> {
    ports.iter().map(|p| Port { category: Some(classify_port(p)), ..p.clone() }).collect()
}
