// SPDX-License-Identifier: Apache-2.0

//! Specification-to-testbench generation: interface extraction, signal
//! classification, stimulus planning and self-checking testbench emission.

mod bits;
mod classify;
mod emit;
mod lexer;
mod ports;
mod simlog;
mod stimulus;

use thiserror::Error;

pub use bits::{corner_patterns, Bits};
pub use classify::{classify_port, classify_ports, is_active_low_reset, is_clock_name, is_reset_name, CONTROL_TOKENS};
pub use emit::{
    check_interface, emit_testbench, generate_testbench, port_differences, testbench_from_golden, Testbench,
    TestbenchBundle, GENERATOR_VERSION, RESET_CYCLES,
};
pub use ports::{module_names, parse_ports, Category, Direction, Port, PortError};
pub use simlog::{parse_sim_log, SimFailure, SimLog};
pub use stimulus::{
    plan_stimulus, Composition, ControlMode, ControlStimulus, DatapathStimulus, StgConfig, StimulusPlan, Vector,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StgError {
    #[error(transparent)]
    Port(#[from] PortError),
    #[error("inout port '{0}' is not supported")]
    InOut(String),
    #[error("port '{0}' has not been classified")]
    Unclassified(String),
    #[error("port list mismatch between DUT and golden: {}", .0.join("; "))]
    PortMismatch(Vec<String>),
    #[error("clock period must be finite and above 2 ns, got {0}")]
    ClockPeriod(f64),
    #[error("design has no output ports")]
    NoOutputs,
    #[error("port name '{0}' uses the reserved 'stg_' prefix")]
    ReservedName(String),
}
