#![no_main]
use libfuzzer_sys::fuzz_target;
use nonlocal_rd::model::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(config) = ScenarioConfig::from_toml_str(s) {
            // cap the projection work so the fuzzer stays fast
            if config.domain.modes() <= 64 {
                let _ = config.build();
            }
        }
    }
});
