#![no_main]

use fgaudin_cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(s) {
        // Whatever parsed must survive a write/read cycle.
        let again = parse_config(&cfg.to_toml()).expect("materialized config parses");
        assert_eq!(again.to_toml(), cfg.to_toml());
    }
});
