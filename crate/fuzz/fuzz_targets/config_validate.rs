#![no_main]

use fgaudin_cli::load_config_str;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = load_config_str(s) {
        load_config_str(&cfg.to_toml()).expect("validated config stays valid");
    }
});
