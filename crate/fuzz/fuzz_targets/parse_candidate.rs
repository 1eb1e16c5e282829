#![no_main]

use evolve_core::eda::{parse_candidate, render_candidate};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&width, rest)) = data.split_first() else { return };
    let width = usize::from(width % 64) + 1;
    if let Ok(bits) = parse_candidate(&String::from_utf8_lossy(rest), width) {
        assert_eq!(bits.len(), width);
        assert_eq!(parse_candidate(&render_candidate(&bits), width).unwrap(), bits);
    }
});
