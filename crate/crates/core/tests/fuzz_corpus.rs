//! Replays the checked-in fuzz corpus, plus every prefix of each seed,
//! through the parser entry points.

use std::fs;
use std::path::PathBuf;

use nonlocal_rd::manifest::RunManifest;
use nonlocal_rd::model::ScenarioConfig;
use nonlocal_rd::spectral::TrajectoryRecord;
use nonlocal_rd::sweep::SweepSpec;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn prefixes(data: &[u8]) -> impl Iterator<Item = &[u8]> {
    let step = (data.len() / 64).max(1);
    (0..=data.len()).step_by(step).map(move |n| &data[..n])
}

fn scenario(data: &[u8]) -> bool {
    let Ok(s) = std::str::from_utf8(data) else { return false };
    match ScenarioConfig::from_toml_str(s) {
        Ok(c) if c.domain.modes() <= 64 => c.build().is_ok(),
        _ => false,
    }
}

fn sweep(data: &[u8]) -> bool {
    let Ok(s) = std::str::from_utf8(data) else { return false };
    SweepSpec::from_toml_str(s).and_then(|spec| spec.cells()).is_ok()
}

fn manifest(data: &[u8]) -> bool {
    let Ok(s) = std::str::from_utf8(data) else { return false };
    match RunManifest::from_json_str(s) {
        Ok(m) => RunManifest::from_json_str(&m.to_json_string().unwrap()).unwrap() == m,
        Err(_) => false,
    }
}

fn trajectory(data: &[u8]) -> bool {
    match TrajectoryRecord::read_csv(data, None) {
        Ok(rec) => rec.write_csv(Vec::new(), true).is_ok(),
        Err(_) => false,
    }
}

fn replay(target: &str, parse: fn(&[u8]) -> bool, valid: &[&str]) {
    for (name, data) in seeds(target) {
        let ok = parse(&data);
        if valid.contains(&name.as_str()) {
            assert!(ok, "{target}/{name} should parse");
        }
        for p in prefixes(&data) {
            parse(p);
        }
    }
}

#[test]
fn scenario_corpus() {
    replay(
        "scenario_toml",
        scenario,
        &["dissipative.toml", "blowup.toml", "decay.toml", "rectangle.toml"],
    );
}

#[test]
fn sweep_corpus() {
    replay(
        "sweep_spec",
        sweep,
        &["inline_base.toml", "base_file.toml", "ratio.toml"],
    );
}

#[test]
fn manifest_corpus() {
    replay("manifest_json", manifest, &["decay.json", "blowup.json"]);
}

#[test]
fn trajectory_corpus() {
    replay(
        "trajectory_csv",
        trajectory,
        &["decay.csv", "blowup_tail.csv", "with_modes.csv"],
    );
}
