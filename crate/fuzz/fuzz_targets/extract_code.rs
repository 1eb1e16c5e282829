#![no_main]

use evolve_core::llm::extract_code;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(code) = extract_code(&String::from_utf8_lossy(data)) {
        assert!(!code.trim().is_empty());
    }
});
