#![no_main]
use libfuzzer_sys::fuzz_target;
use nonlocal_rd::spectral::TrajectoryRecord;

fuzz_target!(|data: &[u8]| {
    if let Ok(rec) = TrajectoryRecord::read_csv(data, None) {
        let _ = rec.write_csv(Vec::new(), false);
    }
});
