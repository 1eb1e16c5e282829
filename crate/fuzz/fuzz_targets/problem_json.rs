#![no_main]

use evolve_core::orchestrator::{parse_clock_sweep, ProblemFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<ProblemFile>(data);
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(periods) = parse_clock_sweep(s) {
            assert!(periods.iter().all(|p| *p > 0.0 && p.is_finite()));
        }
    }
});
