#![no_main]

use hmsim::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // the first line, if it looks like one, doubles as an override
    let overrides: Vec<String> =
        text.lines().take(1).filter(|l| l.contains('=') && !l.contains(' ')).map(String::from).collect();
    if let Ok(cfg) = ExperimentConfig::load(text, &overrides) {
        let _ = ExperimentConfig::load(&cfg.to_toml_string(), &[]);
    }
});
