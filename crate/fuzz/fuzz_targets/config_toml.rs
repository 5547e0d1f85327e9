#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_lab::lab::config::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        // from_toml validates; accepted configs must stay valid.
        cfg.validate().expect("accepted config revalidates");
    }
});
