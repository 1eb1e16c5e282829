#![no_main]

use evolve_core::stg::parse_sim_log;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let log = parse_sim_log(&String::from_utf8_lossy(data));
    if log.sim_ok {
        assert!(log.pass <= log.total);
    }
});
