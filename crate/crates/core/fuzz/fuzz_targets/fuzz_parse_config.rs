//! Fuzzes the full config parser: must never panic, and any successfully
//! parsed config must round-trip through serialize/parse.

#![no_main]

use libfuzzer_sys::fuzz_target;
use selfaffine::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(text) {
        let again = RunConfig::parse(&cfg.serialize()).expect("round-trip must parse");
        assert_eq!(again, cfg, "round-trip must be identical");
        // a validated config must always assemble into a system or report a
        // structured error, never panic
        let _ = cfg.build_system();
    }
});
