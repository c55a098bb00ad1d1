#![no_main]
use libfuzzer_sys::fuzz_target;
use nonlocal_rd::manifest::RunManifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(m) = RunManifest::from_json_str(s) {
            let _ = m.to_json_string();
        }
    }
});
