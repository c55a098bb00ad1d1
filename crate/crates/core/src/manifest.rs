//! Post-run analysis and the JSON run manifest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blowup::{blowup_bracket, blowup_criterion, BlowupBracket, Criterion};
use crate::energy::{solvability_threshold, EnergyParams, EnvelopeOptions, ThresholdParams};
use crate::error::Result;
use crate::model::{Scenario, ScenarioConfig, SwitchTimes};
use crate::regimes::{compute_b1, compute_growth_split, phase_timeline, PhaseInterval};
use crate::spectral::{
    classify_trajectory, energy_identity_residual, step_system, BlowupEvent, K0Switch, ModalProblem, ModalState,
    SeparationResult, StepControl, StepOutcome, TrajectoryRecord, TrajectoryVerdict,
};

/// Samples used for the phase timeline.
const TIMELINE_SAMPLES: usize = 2048;

/// Small-data solvability test at the switch time t0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub t0: f64,
    /// g10 (e^{-(a0 lambda1 + b1_bar) t0} r0)^{p1(t0)}
    pub lhs: f64,
    /// a0 lambda1 + b10(t0)
    pub rhs: f64,
    pub solvable: bool,
}

/// Counts of per-row warnings in the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Warnings {
    pub truncation: usize,
    pub spectral_tail: usize,
    pub threshold_equality: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub start: f64,
    pub horizon: f64,
    pub modes: usize,
    pub switch_times: SwitchTimes,
    pub phase_timeline: Vec<PhaseInterval>,
    pub solvability: Option<SolvabilityReport>,
    pub criterion: Option<Criterion>,
    pub bracket: Option<BlowupBracket>,
    pub verdict: Option<TrajectoryVerdict>,
    pub blowup: Option<BlowupEvent>,
    pub k0_switches: Vec<K0Switch>,
    pub separation: Option<SeparationResult>,
    pub energy_residual: Option<f64>,
    pub warnings: Warnings,
    /// Emitted files, relative to the manifest.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(src: &str) -> Result<Self> {
        Ok(serde_json::from_str(src)?)
    }
}

/// SHA-256 of the canonical TOML form of the configuration.
pub fn scenario_hash(config: &ScenarioConfig) -> Result<String> {
    let text = config.to_toml_string()?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

fn solvability(scenario: &Scenario) -> Option<SolvabilityReport> {
    let t0 = scenario.switch.t0?;
    if t0 <= 0.0 {
        return None;
    }
    let (coeffs, ex, domain) = (&scenario.coefficients, &scenario.exponents, &scenario.domain);
    let a0_lambda1 = scenario.bounds.a.lower * domain.lambda(1);
    let b1_bar = (0..32)
        .filter_map(|i| compute_b1(t0 * (i as f64 + 0.5) / 32.0, coeffs, ex, domain).ok())
        .map(|b| b.sup)
        .fold(f64::NEG_INFINITY, f64::max);
    // p1 = p0 at t0 itself; take the split from the non-dissipative side
    let split = compute_growth_split(t0 + 1e-9 * t0.max(1.0), coeffs, ex, domain).ok()?;
    let params = ThresholdParams {
        a0_lambda1,
        b1_bar: if b1_bar.is_finite() { b1_bar } else { 0.0 },
        b10: split.b1.inf_abs(),
        g10: split.g1_sup,
        p1_t0: ex.p1(t0),
    };
    let r0 = scenario.initial_norm();
    let lhs = params.g10 * ((-(params.a0_lambda1 + params.b1_bar) * t0).exp() * r0).powf(params.p1_t0);
    Some(SolvabilityReport {
        t0,
        lhs,
        rhs: params.a0_lambda1 + params.b10,
        solvable: solvability_threshold(r0, t0, &params),
    })
}

/// Criterion and bracket from the state at t1, when the run reaches t1.
fn blowup_analysis(scenario: &Scenario, control: StepControl) -> Result<(Option<Criterion>, Option<BlowupBracket>)> {
    let Some(t1) = scenario.switch.t1 else {
        return Ok((None, None));
    };
    if t1 < scenario.start || t1 >= scenario.horizon() {
        return Ok((None, None));
    }
    let problem = ModalProblem::from_scenario(scenario);
    let initial = ModalState::new(scenario.start, scenario.initial.clone(), problem.lambdas());
    let at_t1 = match step_system(&problem, &initial, t1 - scenario.start, control)? {
        StepOutcome::Advanced(s) => s,
        StepOutcome::BlowUp { .. } => return Ok((None, None)),
    };
    let criterion = blowup_criterion(
        &at_t1.coeffs,
        t1,
        &scenario.domain,
        &scenario.coefficients,
        &scenario.exponents,
    )?;
    if !criterion.blows_up || at_t1.r == 0.0 {
        return Ok((Some(criterion), None));
    }
    let lambdas = problem.lambdas();
    let lambda_top = at_t1
        .coeffs
        .iter()
        .zip(lambdas)
        .filter(|(c, _)| **c != 0.0)
        .map(|(_, l)| *l)
        .fold(lambdas[0], f64::max);
    let b = &scenario.bounds;
    let params = EnergyParams::from_bounds(b, lambdas[0], scenario.exponents.p1.clone())
        .and_then(|p| p.with_lambda_top(lambda_top));
    let bracket = match params {
        Ok(p) => Some(blowup_bracket(
            at_t1.r * at_t1.r,
            t1,
            criterion.delta,
            &p,
            scenario.horizon() - t1,
            &EnvelopeOptions::default(),
        )?),
        Err(_) => None,
    };
    Ok((Some(criterion), bracket))
}

/// Assembles the manifest for a completed run.
pub fn analyze_run(
    config: &ScenarioConfig,
    scenario: &Scenario,
    record: &TrajectoryRecord,
    separation: Option<SeparationResult>,
) -> Result<RunManifest> {
    let problem = ModalProblem::from_scenario(scenario);
    let control = StepControl {
        rtol: scenario.solver.rtol,
        atol: scenario.solver.atol,
        guard: scenario.solver.guard,
        ..StepControl::default()
    };
    let (criterion, bracket) = blowup_analysis(scenario, control)?;
    let mut verdict = classify_trajectory(record, scenario.solver.tail_window)?;
    verdict.stats.separation_exponent = separation.map(|s| s.exponent).filter(|e| e.is_finite());
    Ok(RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_hash: scenario_hash(config)?,
        seed: scenario.seed,
        start: scenario.start,
        horizon: scenario.horizon(),
        modes: scenario.domain.mode_count(),
        switch_times: scenario.switch,
        phase_timeline: phase_timeline(
            &scenario.exponents,
            scenario.start,
            scenario.horizon(),
            TIMELINE_SAMPLES,
        ),
        solvability: solvability(scenario),
        criterion,
        bracket,
        verdict: Some(verdict),
        blowup: record.blowup.clone(),
        k0_switches: record.k0_switches.clone(),
        separation: separation.filter(|s| s.exponent.is_finite()),
        energy_residual: Some(energy_identity_residual(record, &problem)?),
        warnings: Warnings {
            truncation: record.truncation_warnings,
            spectral_tail: record.tail_warnings,
            threshold_equality: record.equality_events,
        },
        files: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::run_scenario;

    const SCENARIO: &str = r#"
seed = 3
[domain]
kind = "interval"
length = 3.141592653589793
modes = 32
[coefficients]
a = { kind = "constant", value = 1.0 }
b = { kind = "constant", value = 2.0 }
f = { kind = "constant", value = 0.5 }
g = { kind = "constant", value = 1.0 }
[exponents]
p = 2.0
p0 = { kind = "relaxing", initial = 1.0, rate = 1.0 }
p1 = { kind = "constant", value = 0.5 }
[initial]
field = { kind = "parabola", amplitude = 0.2 }
[solver]
horizon = 3.0
cadence = 0.05
"#;

    #[test]
    fn manifest_round_trips() {
        let config = ScenarioConfig::from_toml_str(SCENARIO).unwrap();
        let scenario = config.build().unwrap();
        let record = run_scenario(&scenario).unwrap();
        let mut m = analyze_run(&config, &scenario, &record, None).unwrap();
        m.files.push("trajectory.csv".into());
        let text = m.to_json_string().unwrap();
        assert_eq!(RunManifest::from_json_str(&text).unwrap(), m);
        assert_eq!(m.scenario_hash.len(), 64);
        assert!(m.energy_residual.unwrap() < 1e-4);
        assert!(m.solvability.is_some());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::from_toml_str(SCENARIO).unwrap();
        let b = ScenarioConfig::from_toml_str(&SCENARIO.replace("seed = 3", "seed = 4")).unwrap();
        assert_eq!(scenario_hash(&a).unwrap(), scenario_hash(&a.clone()).unwrap());
        assert_ne!(scenario_hash(&a).unwrap(), scenario_hash(&b).unwrap());
    }
}
