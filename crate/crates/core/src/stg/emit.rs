// SPDX-License-Identifier: Apache-2.0

//! Verilog-2005 self-checking testbench emission.
//!
//! Timeline (P = clock period, H = P/2): the clock starts low and toggles
//! every H. Reset is held for three rising edges, then released on the
//! following falling edge together with vector 0. Vector k is applied at
//! the falling edge (3 + k)·P and checked one time unit after the rising
//! edge at H + (3 + k)·P. The first check is therefore the post-reset check.

use serde::{Deserialize, Serialize};

use super::classify::is_active_low_reset;
use super::stimulus::{check_stimulable, plan_stimulus, StgConfig, StimulusPlan, Vector};
use super::{classify_ports, is_clock_name, parse_ports, Category, Direction, Port, StgError};

pub const GENERATOR_VERSION: &str = "evolve-stg 1";

/// Cycles reset is held for before the first vector.
pub const RESET_CYCLES: u32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestbenchBundle {
    pub top_module: String,
    pub golden_module: String,
    pub ports: Vec<Port>,
    pub plan: StimulusPlan,
    pub clock_period_ns: f64,
    pub total_vectors: usize,
    pub source: String,
}

/// Testbench used by the evaluator: either generated here or supplied by the
/// problem author, in which case only the `STG_RESULT` protocol is assumed.
#[derive(Clone, Debug, PartialEq)]
pub enum Testbench {
    Generated(Box<TestbenchBundle>),
    Supplied { source: String },
}

impl Testbench {
    pub fn source(&self) -> &str {
        match self {
            Testbench::Generated(b) => &b.source,
            Testbench::Supplied { source } => source,
        }
    }

    pub fn bundle(&self) -> Option<&TestbenchBundle> {
        match self {
            Testbench::Generated(b) => Some(b),
            Testbench::Supplied { .. } => None,
        }
    }
}

impl TestbenchBundle {
    /// Simulation time (ns) at which vector `k` is checked.
    pub fn check_time(&self, k: usize) -> f64 {
        self.clock_period_ns / 2.0 + (RESET_CYCLES as usize + k) as f64 * self.clock_period_ns + 1.0
    }

    /// Maps a `STG_FAIL` timestamp back to the vector that was being checked.
    pub fn vector_at_time(&self, t: u64) -> Option<(usize, Vector)> {
        let p = self.clock_period_ns;
        let slot = ((t as f64 - 1.0 - p / 2.0) / p).round();
        if slot < RESET_CYCLES as f64 {
            return None;
        }
        let k = slot as usize - RESET_CYCLES as usize;
        (k < self.total_vectors).then(|| (k, self.plan.vector(k)))
    }
}

fn is_simple_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

fn vid(s: &str) -> String {
    if is_simple_ident(s) {
        s.to_string()
    } else {
        format!("\\{s} ")
    }
}

fn fmt_ns(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn range(width: u32) -> String {
    if width == 1 {
        String::new()
    } else {
        format!("[{}:0] ", width - 1)
    }
}

/// Lists every difference between two port lists (name, direction, width).
pub fn port_differences(dut: &[Port], golden: &[Port]) -> Vec<String> {
    let mut out = Vec::new();
    for d in dut {
        match golden.iter().find(|g| g.name == d.name) {
            None => out.push(format!("'{}' missing from golden", d.name)),
            Some(g) if g.direction != d.direction => {
                out.push(format!("'{}' direction differs: DUT {}, golden {}", d.name, d.direction, g.direction))
            }
            Some(g) if g.width != d.width => {
                out.push(format!("'{}' width differs: DUT {}, golden {}", d.name, d.width, g.width))
            }
            Some(_) => {}
        }
    }
    for g in golden {
        if !dut.iter().any(|d| d.name == g.name) {
            out.push(format!("'{}' missing from DUT", g.name));
        }
    }
    out
}

pub fn emit_testbench(
    dut_ports: &[Port],
    golden_ports: &[Port],
    plan: &StimulusPlan,
    top_module: &str,
    golden_module: &str,
    clock_period_ns: f64,
) -> Result<TestbenchBundle, StgError> {
    let diffs = port_differences(dut_ports, golden_ports);
    if !diffs.is_empty() {
        return Err(StgError::PortMismatch(diffs));
    }
    let ports = classify_ports(golden_ports);
    check_stimulable(&ports)?;
    if !clock_period_ns.is_finite() || clock_period_ns <= 2.0 {
        return Err(StgError::ClockPeriod(clock_period_ns));
    }
    if let Some(p) = ports.iter().find(|p| p.name.starts_with("stg_")) {
        return Err(StgError::ReservedName(p.name.clone()));
    }
    let outputs: Vec<&Port> = ports.iter().filter(|p| p.direction == Direction::Out).collect();
    if outputs.is_empty() {
        return Err(StgError::NoOutputs);
    }
    let clocks: Vec<&Port> = ports
        .iter()
        .filter(|p| p.category == Some(Category::ClockReset) && is_clock_name(&p.name))
        .collect();
    let resets: Vec<&Port> = ports
        .iter()
        .filter(|p| p.category == Some(Category::ClockReset) && !is_clock_name(&p.name))
        .collect();
    let driven: Vec<&Port> = ports
        .iter()
        .filter(|p| matches!(p.category, Some(Category::Control | Category::Datapath)))
        .collect();

    let total = plan.vector_count();
    let half = fmt_ns(clock_period_ns / 2.0);
    let mut s = String::new();
    let w = &mut s;
    use std::fmt::Write as _;

    let _ = writeln!(w, "// Generated by {GENERATOR_VERSION}; seed={}; vectors={total}", plan.seed);
    let _ = writeln!(w, "// DUT: {top_module}  golden: {golden_module}");
    let _ = writeln!(w, "`timescale 1ns/1ps");
    let _ = writeln!(w, "module tb;");
    let _ = writeln!(w, "  reg stg_clk;");
    let _ = writeln!(w, "  reg stg_ok;");
    let _ = writeln!(w, "  integer stg_pass;");
    let _ = writeln!(w, "  integer stg_total;");
    let _ = writeln!(w, "  integer stg_cycles;");
    for c in &clocks {
        let _ = writeln!(w, "  wire {}{};", range(c.width), vid(&c.name));
        let _ = writeln!(w, "  assign {} = {{{}{{stg_clk}}}};", vid(&c.name), c.width);
    }
    for p in resets.iter().chain(driven.iter()) {
        let _ = writeln!(w, "  reg {}{};", range(p.width), vid(&p.name));
    }
    for o in &outputs {
        let _ = writeln!(w, "  wire {}{};", range(o.width), vid(&format!("stg_dut_{}", o.name)));
        let _ = writeln!(w, "  wire {}{};", range(o.width), vid(&format!("stg_ref_{}", o.name)));
    }
    let _ = writeln!(w);

    for (module, inst, prefix) in [(top_module, "stg_dut", "stg_dut_"), (golden_module, "stg_ref", "stg_ref_")] {
        let conns: Vec<String> = ports
            .iter()
            .map(|p| {
                let sig = if p.direction == Direction::Out { vid(&format!("{prefix}{}", p.name)) } else { vid(&p.name) };
                format!("    .{}({})", vid(&p.name), sig)
            })
            .collect();
        let _ = writeln!(w, "  {} {inst} (\n{}\n  );", vid(module), conns.join(",\n"));
    }
    let _ = writeln!(w);

    let _ = writeln!(w, "  always #{half} stg_clk = ~stg_clk;");
    let _ = writeln!(w);

    let _ = writeln!(w, "  task stg_check;");
    let _ = writeln!(w, "    begin");
    let _ = writeln!(w, "      stg_ok = 1'b1;");
    for o in &outputs {
        let d = vid(&format!("stg_dut_{}", o.name));
        let r = vid(&format!("stg_ref_{}", o.name));
        let _ = writeln!(w, "      if ({d} !== {r}) begin");
        let _ = writeln!(w, "        stg_ok = 1'b0;");
        let _ = writeln!(w, "        $display(\"STG_FAIL t=%0t sig={} exp=%h got=%h\", $time, {r}, {d});", o.name);
        let _ = writeln!(w, "      end");
    }
    let _ = writeln!(w, "      stg_total = stg_total + 1;");
    let _ = writeln!(w, "      if (stg_ok) stg_pass = stg_pass + 1;");
    let _ = writeln!(w, "    end");
    let _ = writeln!(w, "  endtask");
    let _ = writeln!(w);

    let _ = writeln!(w, "  initial begin");
    let _ = writeln!(w, "    stg_clk = 1'b0;");
    let _ = writeln!(w, "    stg_pass = 0;");
    let _ = writeln!(w, "    stg_total = 0;");
    let _ = writeln!(w, "    stg_cycles = 0;");
    for r in &resets {
        let level = if is_active_low_reset(&r.name) { 0 } else { 1 };
        let _ = writeln!(w, "    {} = {{{}{{1'b{level}}}}};", vid(&r.name), r.width);
    }
    for p in &driven {
        let _ = writeln!(w, "    {} = {}'h0;", vid(&p.name), p.width);
    }
    let _ = writeln!(w, "    repeat ({RESET_CYCLES}) @(posedge stg_clk);");
    for (k, v) in plan.vectors().enumerate() {
        let _ = writeln!(w, "    @(negedge stg_clk);");
        if k == 0 {
            for r in &resets {
                let level = if is_active_low_reset(&r.name) { 1 } else { 0 };
                let _ = writeln!(w, "    {} = {{{}{{1'b{level}}}}};", vid(&r.name), r.width);
            }
        }
        let assigns: Vec<String> =
            v.assignments.iter().map(|(n, b)| format!("{} = {};", vid(n), b.verilog_literal())).collect();
        if !assigns.is_empty() {
            let _ = writeln!(w, "    {}", assigns.join(" "));
        }
        let _ = writeln!(w, "    @(posedge stg_clk); #1 stg_check; stg_cycles = stg_cycles + 1;");
    }
    let _ = writeln!(w, "    $display(\"STG_CYCLES n=%0d\", stg_cycles);");
    let _ = writeln!(w, "    $display(\"STG_RESULT pass=%0d total=%0d\", stg_pass, stg_total);");
    let _ = writeln!(w, "    $finish;");
    let _ = writeln!(w, "  end");
    let _ = writeln!(w, "endmodule");

    Ok(TestbenchBundle {
        top_module: top_module.to_string(),
        golden_module: golden_module.to_string(),
        ports,
        plan: plan.clone(),
        clock_period_ns,
        total_vectors: total,
        source: s,
    })
}

/// Parses both sources, plans stimulus from the golden interface and emits
/// the testbench. The golden module is `<top>_ref`.
pub fn generate_testbench(
    dut_src: &str,
    golden_src: &str,
    top_module: &str,
    clock_period_ns: f64,
    config: &StgConfig,
) -> Result<TestbenchBundle, StgError> {
    let golden_module = format!("{top_module}_ref");
    let dut = parse_ports(dut_src, top_module)?;
    let golden = classify_ports(&parse_ports(golden_src, &golden_module)?);
    let plan = plan_stimulus(&golden, config)?;
    emit_testbench(&dut, &golden, &plan, top_module, &golden_module, clock_period_ns)
}

/// Builds the testbench from the golden model alone, for reuse across
/// candidates whose interface is checked separately with [`check_interface`].
pub fn testbench_from_golden(
    golden_src: &str,
    top_module: &str,
    clock_period_ns: f64,
    config: &StgConfig,
) -> Result<TestbenchBundle, StgError> {
    let golden_module = format!("{top_module}_ref");
    let golden = classify_ports(&parse_ports(golden_src, &golden_module)?);
    let plan = plan_stimulus(&golden, config)?;
    emit_testbench(&golden, &golden, &plan, top_module, &golden_module, clock_period_ns)
}

/// Checks that a candidate declares `top_module` with the expected ports.
pub fn check_interface(candidate_src: &str, top_module: &str, expected: &[Port]) -> Result<(), String> {
    let ports = parse_ports(candidate_src, top_module).map_err(|e| e.to_string())?;
    let diffs = port_differences(&ports, expected);
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(format!("port list mismatch with the reference: {}", diffs.join("; ")))
    }
}
