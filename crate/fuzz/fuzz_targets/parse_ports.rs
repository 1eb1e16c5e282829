#![no_main]

use evolve_core::stg::{classify_ports, parse_ports};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let top = src.split_whitespace().nth(1).unwrap_or("top").trim_end_matches(['(', ';', '#']);
    if let Ok(ports) = parse_ports(src, top) {
        let classified = classify_ports(&ports);
        assert_eq!(classified.len(), ports.len());
    }
});
