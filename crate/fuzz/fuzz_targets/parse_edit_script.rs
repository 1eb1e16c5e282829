#![no_main]

use evolve_core::search::{apply_edits, parse_edit_script};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (parent, response) = text.split_once('\0').unwrap_or(("module m;\nendmodule\n", text));
    if let Ok(script) = parse_edit_script(response) {
        let _ = apply_edits(parent, &script);
    }
});
