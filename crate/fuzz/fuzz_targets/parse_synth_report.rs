#![no_main]

use evolve_core::eda::{parse_synth_report, AreaMode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let log = String::from_utf8_lossy(data);
    for mode in [AreaMode::GateEquivalent, AreaMode::Liberty] {
        if let Ok(r) = parse_synth_report(&log, "top", mode) {
            assert!(r.area.is_finite() && r.area >= 0.0);
        }
    }
});
