// SPDX-License-Identifier: Apache-2.0

//! Yosys log parsing: cell statistics, chip area and ABC delay.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How area is derived from the statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaMode {
    /// Generic cells weighted by [`gate_equivalents`]; unit is a 2-input NAND.
    GateEquivalent,
    /// The `Chip area` line printed by `stat -liberty`.
    Liberty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub area: f64,
    pub cells: BTreeMap<String, u64>,
    /// Critical path reported by ABC, when a delay target was given.
    pub delay_ps: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("no statistics section in synthesis log")]
    NoStatistics,
    #[error("no gate-equivalent weight for cell type '{0}'")]
    UnknownCell(String),
    #[error("no chip area reported for module '{0}'")]
    NoChipArea(String),
    #[error("malformed statistics line: {0}")]
    Malformed(String),
}

/// Area of a Yosys internal gate in 2-input-NAND equivalents.
pub fn gate_equivalents(cell: &str) -> Option<f64> {
    let w = match cell {
        "$scopeinfo" => 0.0,
        "$_BUF_" | "$_NOT_" => 0.5,
        "$_NAND_" | "$_NOR_" => 1.0,
        "$_AND_" | "$_OR_" | "$_ANDNOT_" | "$_ORNOT_" | "$_AOI3_" | "$_OAI3_" | "$_TBUF_" => 1.5,
        "$_AOI4_" | "$_OAI4_" => 2.0,
        "$_NMUX_" => 2.5,
        "$_XOR_" | "$_XNOR_" | "$_MUX_" => 3.0,
        "$_MUX4_" => 9.0,
        "$_MUX8_" => 21.0,
        "$_MUX16_" => 45.0,
        _ => {
            const FLOPS: &[&str] = &["$_DFF", "$_SDFF", "$_ALDFF", "$_DFFSR", "$_FF_"];
            if FLOPS.iter().any(|p| cell.starts_with(p)) {
                6.0
            } else if cell.starts_with("$_DLATCH") || cell.starts_with("$_SR_") {
                4.0
            } else {
                return None;
            }
        }
    };
    Some(w)
}

fn pass_header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\d+(\.\d+)*\. ").unwrap())
}

fn chip_area_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"Chip area for (?:top )?module '\\?([^']+)':\s*([0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)").unwrap()
    })
}

fn delay_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"Delay\s*=\s*([0-9]+(?:\.[0-9]+)?)\s*ps").unwrap())
}

/// Lines of the last `Printing statistics.` section.
fn last_stat_section(log: &str) -> Option<Vec<&str>> {
    let lines: Vec<&str> = log.lines().collect();
    let start = lines.iter().rposition(|l| pass_header_re().is_match(l) && l.trim_end().ends_with("Printing statistics."))?;
    let body = &lines[start + 1..];
    let end = body
        .iter()
        .position(|l| pass_header_re().is_match(l) || l.starts_with("End of script"))
        .unwrap_or(body.len());
    Some(body[..end].to_vec())
}

/// Splits a statistics section into `=== name ===` blocks.
fn blocks<'a>(section: &[&'a str]) -> Vec<(String, Vec<&'a str>)> {
    let mut out: Vec<(String, Vec<&str>)> = Vec::new();
    for line in section {
        let t = line.trim();
        if let Some(name) = t.strip_prefix("=== ").and_then(|r| r.strip_suffix(" ===")) {
            out.push((name.trim_start_matches('\\').to_string(), Vec::new()));
        } else if let Some((_, body)) = out.last_mut() {
            body.push(line);
        }
    }
    out
}

fn is_count(tok: &str) -> bool {
    tok == "-" || tok.parse::<f64>().is_ok()
}

/// Cell-type counts following the `cells` line of a block.
fn cell_counts(block: &[&str]) -> Result<BTreeMap<String, u64>, ReportError> {
    let mut cells = BTreeMap::new();
    let mut iter = block.iter();
    for line in iter.by_ref() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.last() == Some(&"cells") && toks.len() >= 2 && toks[..toks.len() - 1].iter().all(|t| is_count(t)) {
            break;
        }
    }
    for line in iter {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 || !toks[..toks.len() - 1].iter().all(|t| is_count(t)) {
            break;
        }
        let name = *toks.last().unwrap();
        if name == "submodules" {
            break;
        }
        let count: u64 = toks[0].parse().map_err(|_| ReportError::Malformed(line.trim().to_string()))?;
        *cells.entry(name.to_string()).or_insert(0) += count;
    }
    Ok(cells)
}

pub fn parse_synth_report(log: &str, top: &str, mode: AreaMode) -> Result<SynthReport, ReportError> {
    let section = last_stat_section(log).ok_or(ReportError::NoStatistics)?;
    let blocks = blocks(&section);
    let chosen = blocks
        .iter()
        .find(|(n, _)| n == "design hierarchy")
        .or_else(|| blocks.iter().find(|(n, _)| n == top));
    let cells = match chosen {
        Some((_, body)) => cell_counts(body)?,
        // Yosys prints no block for a module without cells or wires.
        None if blocks.is_empty() => BTreeMap::new(),
        None => return Err(ReportError::Malformed(format!("no statistics block for module '{top}'"))),
    };

    let mut warnings = Vec::new();
    let area = match mode {
        AreaMode::GateEquivalent => {
            let mut total = 0.0;
            for (name, count) in &cells {
                let w = gate_equivalents(name).ok_or_else(|| ReportError::UnknownCell(name.clone()))?;
                total += w * *count as f64;
            }
            total
        }
        AreaMode::Liberty => {
            for line in &section {
                if let Some(rest) = line.trim().strip_prefix("Area for cell type ") {
                    warnings.push(format!("liberty area unknown for {}", rest.trim_end_matches(" is unknown!")));
                }
            }
            let found = section
                .iter()
                .rev()
                .filter_map(|l| chip_area_re().captures(l))
                .find(|c| &c[1] == top)
                .map(|c| c[2].parse::<f64>().map_err(|_| ReportError::Malformed(c[0].to_string())));
            match found {
                Some(a) => a?,
                None if cells.is_empty() => 0.0,
                None => return Err(ReportError::NoChipArea(top.to_string())),
            }
        }
    };
    let delay_ps = log.lines().rev().find_map(|l| delay_re().captures(l)).and_then(|c| c[1].parse().ok());
    Ok(SynthReport { area, cells, delay_ps, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_cover_flop_variants() {
        for c in ["$_DFF_P_", "$_SDFF_PP0_", "$_DFFE_PP_", "$_SDFFCE_PN1P_", "$_DFFSR_PPP_", "$_ALDFF_PP_"] {
            assert_eq!(gate_equivalents(c), Some(6.0), "{c}");
        }
        assert_eq!(gate_equivalents("$_DLATCH_P_"), Some(4.0));
        assert_eq!(gate_equivalents("$mul"), None);
    }

    #[test]
    fn unknown_cell_is_an_error() {
        let log = "5. Printing statistics.\n\n=== m ===\n\n        3 cells\n        3   $alu\n";
        assert_eq!(parse_synth_report(log, "m", AreaMode::GateEquivalent), Err(ReportError::UnknownCell("$alu".into())));
    }

    #[test]
    fn missing_section_is_an_error() {
        assert_eq!(parse_synth_report("", "m", AreaMode::GateEquivalent), Err(ReportError::NoStatistics));
    }
}
