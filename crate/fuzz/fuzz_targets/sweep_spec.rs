#![no_main]
use libfuzzer_sys::fuzz_target;
use nonlocal_rd::sweep::SweepSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = SweepSpec::from_toml_str(s) {
            if let Ok(cells) = spec.cells() {
                for cell in cells.iter().take(4) {
                    let _ = spec.cell_seed(cell.index);
                }
            }
        }
    }
});
