//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p nonlocal-rd-cli --test acceptance`. Tolerances
//! are the constants next to each check; random cases come from fixed
//! ChaCha8 seeds so every run sees the same parameter sets.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use nonlocal_rd::blowup::{bernoulli_blowup_time, blowup_time, blowup_time_upper, envelope_singular_time};
use nonlocal_rd::energy::{integrate_envelopes, EnergyParams, EnvelopeOptions};
use nonlocal_rd::model::{ExponentSchedule, Scenario, ScenarioConfig, Schedule, SpectralDomain};
use nonlocal_rd::oracle::{compare_solvers, heat_convergence, observed_orders};
use nonlocal_rd::regimes::young_gap_constant;
use nonlocal_rd::spectral::{
    classify_trajectory, compute_k0, energy_identity_residual, run, run_scenario, separation_exponent, step_system,
    Averaged, ModalProblem, ModalState, StepControl, StepOutcome, VerdictTag,
};
use nonlocal_rd::sweep::{run_sweep, write_sweep_csv, SweepSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const YOUNG_REL: f64 = 1e-8;
const YOUNG_BUDGET_S: f64 = 5.0;
const BERNOULLI_REL: f64 = 1e-8;
const GUARD_REL: f64 = 5e-3;
const BLOWUP_BUDGET_S: f64 = 30.0;
const ROOT_ABS: f64 = 1e-6;
const LINEAR_REL: f64 = 1e-8;
const SANDWICH_TOL: f64 = 1e-6;
const CROSS_L2: f64 = 1e-3;
const FD_ORDER: f64 = 1.9;
const ENERGY_REL: f64 = 1e-4;
const SEPARATION_REL: f64 = 0.05;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn load_scenario(rel: &str) -> Scenario {
    let text = std::fs::read_to_string(repo_file(rel)).unwrap();
    ScenarioConfig::from_toml_str(&text).unwrap().build().unwrap()
}

fn degenerate_problem(length: f64, modes: usize, av: Averaged, p1: f64) -> ModalProblem {
    let domain = SpectralDomain::interval(length, modes).unwrap();
    let ex = ExponentSchedule::new(1.0, Schedule::constant(0.0), Schedule::constant(p1));
    ModalProblem::new(domain, av, ex)
}

fn golden_max(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv * (hi - lo);
    let mut x2 = lo + inv * (hi - lo);
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..300 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv * (hi - lo);
            f2 = h(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv * (hi - lo);
            f1 = h(x1);
        }
    }
    f1.max(f2)
}

fn young_tightness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let clock = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let f = rng.random_range(0.1..10.0);
        let g = rng.random_range(0.1..10.0);
        let p1 = rng.random_range(0.05..3.0);
        let p0 = p1 + rng.random_range(0.05..3.0);
        let c = young_gap_constant(f, g, p0, p1).map_err(|e| e.to_string())?;
        // search in log s; beyond hi the f term dominates
        let hi = (2.0 * (g / f).powf(1.0 / (p0 - p1))).ln();
        let brute = golden_max(|l: f64| g * (p1 * l).exp() - f * (p0 * l).exp(), hi - 80.0, hi);
        worst = worst.max((c - brute).abs() / brute.abs());
    }
    let secs = clock.elapsed().as_secs_f64();
    ensure(worst <= YOUNG_REL, format!("worst relative gap {worst:.2e}"))?;
    ensure(secs < YOUNG_BUDGET_S, format!("took {secs:.2} s"))?;
    Ok(format!("1000 cases, worst rel {worst:.1e}, {secs:.2} s"))
}

fn blowup_time_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let clock = Instant::now();
    let (mut worst_closed, mut worst_guard, mut worst_refined) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..100 {
        let length = rng.random_range(1.0..4.0);
        let a = rng.random_range(0.2..2.0);
        let g = rng.random_range(0.5..2.0);
        let q = rng.random_range(1.0..3.0);
        // the upper-time constants are (a0 lambda1, G0): no zeroth-order damping
        let problem = degenerate_problem(length, 4, Averaged::constant(a, 0.0, 0.0, g), q);
        let lambda1 = problem.lambdas()[0];
        let c1 = a * lambda1;
        let y1 = (c1 / g).powf(2.0 / q) * rng.random_range(1.2..4.0);

        let params =
            EnergyParams::new((a, a), (0.0, 0.0), (g, g), lambda1, Schedule::constant(q)).map_err(|e| e.to_string())?;
        let closed = blowup_time_upper(y1, 0.0, &params).ok_or(format!("case {case}: no upper time"))?;
        let exact = bernoulli_blowup_time(y1, c1, g, q).ok_or(format!("case {case}: no Bernoulli time"))?;
        worst_closed = worst_closed.max((closed - exact).abs() / exact);

        let s0 = ModalState::single_mode(0.0, 1, y1.sqrt(), problem.lambdas());
        let out = step_system(&problem, &s0, 10.0 * exact, StepControl::default()).map_err(|e| e.to_string())?;
        let StepOutcome::BlowUp { event, .. } = out else {
            return Err(format!("case {case}: spectral run did not blow up"));
        };
        worst_guard = worst_guard.max((event.guard_time - exact).abs() / exact);
        worst_refined = worst_refined.max((event.time - exact).abs() / exact);
    }
    let secs = clock.elapsed().as_secs_f64();
    ensure(
        worst_closed <= BERNOULLI_REL,
        format!("closed form off by {worst_closed:.2e}"),
    )?;
    ensure(worst_guard <= GUARD_REL, format!("guard time off by {worst_guard:.2e}"))?;
    ensure(
        worst_refined <= GUARD_REL,
        format!("refined time off by {worst_refined:.2e}"),
    )?;
    ensure(secs < BLOWUP_BUDGET_S, format!("took {secs:.2} s"))?;
    Ok(format!(
        "100 cases, closed rel {worst_closed:.1e}, guard rel {worst_guard:.1e}, refined rel {worst_refined:.1e}, {secs:.2} s"
    ))
}

fn variable_exponent_root() -> Check {
    let p1 = Schedule::Affine {
        intercept: 2.0,
        slope: 1.0,
    };
    let opts = EnvelopeOptions::default();
    let mut detail = Vec::new();
    for (y1, c1, c2) in [(2.0, 1.0, 1.0), (1.5, 0.5, 1.0), (3.0, 1.0, 0.8)] {
        let root = blowup_time(y1, 0.0, c1, c2, &p1).ok_or("no root")?;
        let direct = envelope_singular_time(y1, 0.0, 5.0, (c1, c2), &p1, &opts)
            .map_err(|e| e.to_string())?
            .ok_or("direct integration found no singularity")?;
        ensure(
            (root - direct).abs() <= ROOT_ABS,
            format!("y1 = {y1}: root {root} vs direct {direct}"),
        )?;
        detail.push(format!("t* = {root:.6}"));
    }
    Ok(detail.join(", "))
}

fn linear_decay() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let control = StepControl {
        rtol: 1e-12,
        atol: 1e-300,
        ..StepControl::default()
    };
    let mut worst = 0.0f64;
    for case in 0..20 {
        let a = rng.random_range(0.2..1.0);
        let b = rng.random_range(0.0..1.0);
        let length = rng.random_range(2.0..4.0);
        let problem = degenerate_problem(length, 8, Averaged::constant(a, b, 0.0, 0.0), 2.0);
        let u0: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s0 = ModalState::new(0.0, u0.clone(), problem.lambdas());
        let StepOutcome::Advanced(s) = step_system(&problem, &s0, 1.0, control).map_err(|e| e.to_string())? else {
            return Err(format!("case {case}: unexpected blow-up"));
        };
        for (k, (u, lambda)) in s.coeffs.iter().zip(problem.lambdas()).enumerate() {
            let exact = u0[k] * (-(a * lambda + b)).exp();
            worst = worst.max((u - exact).abs() / exact.abs());
        }
    }
    ensure(worst <= LINEAR_REL, format!("worst relative mode error {worst:.2e}"))?;
    Ok(format!("20 cases x 8 modes, worst rel {worst:.1e}"))
}

struct SandwichRun {
    problem: ModalProblem,
    record: nonlocal_rd::spectral::TrajectoryRecord,
}

fn sandwich_runs() -> Result<Vec<(SandwichRun, EnergyParams)>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut out = Vec::new();
    for _ in 0..20 {
        let a = rng.random_range(0.5..1.5);
        let b = rng.random_range(0.0..0.5);
        let f = rng.random_range(0.0..0.3);
        let g = rng.random_range(0.3..1.5);
        let q = rng.random_range(1.0..2.5);
        let problem = degenerate_problem(PI, 8, Averaged::constant(a, b, f, g), q);
        let lambdas = problem.lambdas().to_vec();
        let mut u0: Vec<f64> = vec![0.0; 8];
        for c in u0.iter_mut().take(3) {
            *c = rng.random_range(0.2..1.0);
        }
        let c1 = a * lambdas[0] + b + f;
        let r0 = (c1 / g).powf(1.0 / q) * rng.random_range(0.5f64..2.0).sqrt();
        let norm = u0.iter().map(|c| c * c).sum::<f64>().sqrt();
        u0.iter_mut().for_each(|c| *c *= r0 / norm);
        let s0 = ModalState::new(0.0, u0, &lambdas);
        let record = run(&problem, &s0, 2.0, 0.01, StepControl::default()).map_err(|e| e.to_string())?;
        let params = EnergyParams::new((a, a), (b + f, b + f), (g, g), lambdas[0], Schedule::constant(q))
            .and_then(|p| p.with_lambda_top(lambdas[2]))
            .map_err(|e| e.to_string())?;
        out.push((SandwichRun { problem, record }, params));
    }
    Ok(out)
}

fn envelope_sandwich(runs: &[(SandwichRun, EnergyParams)]) -> Check {
    let opts = EnvelopeOptions::default();
    let mut compared = 0usize;
    let mut worst = 0.0f64;
    for (i, (run, params)) in runs.iter().enumerate() {
        let y0 = run.record.rows[0].r_sq;
        let env = integrate_envelopes(y0, 0.0, 2.0, params, &opts).map_err(|e| e.to_string())?;
        let stop = env.first_singularity().unwrap_or(f64::INFINITY);
        for row in &run.record.rows {
            if row.t >= stop || row.r >= 1e6 {
                break;
            }
            let j = (row.t / opts.cadence).round() as usize;
            ensure(
                (env.times[j] - row.t).abs() < 1e-9,
                format!("run {i}: grids disagree at {}", row.t),
            )?;
            let (lo, hi) = (env.lower[j], env.upper[j]);
            if !(lo.is_finite() && hi.is_finite()) {
                break;
            }
            let tol = SANDWICH_TOL * (1.0 + row.r_sq);
            let excess = (lo - row.r_sq).max(row.r_sq - hi) / (1.0 + row.r_sq);
            worst = worst.max(excess);
            ensure(
                lo - tol <= row.r_sq && row.r_sq <= hi + tol,
                format!("run {i} t = {}: {lo} <= {} <= {hi} fails", row.t, row.r_sq),
            )?;
            compared += 1;
        }
    }
    Ok(format!("20 runs, {compared} samples, worst excess {worst:.1e}"))
}

fn dichotomy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (a, b, f, g, q) = (1.0, 0.0, 0.1, 1.0, 2.0);
    let mut detail = Vec::new();
    for k0 in [2usize, 4, 8] {
        let problem = degenerate_problem(PI, 16, Averaged::constant(a, b, f, g), q);
        let lambdas = problem.lambdas().to_vec();
        // g r0^q sits midway between the levels of modes k0-1 and k0
        let level = |k: usize| a * lambdas[k - 1] + b + f;
        let r0 = ((0.5 * (level(k0 - 1) + level(k0))) / g).powf(1.0 / q);
        ensure(compute_k0(0.0, r0, &problem).index == k0, format!("k0 != {k0}"))?;
        let shaped = |range: std::ops::Range<usize>, rng: &mut ChaCha8Rng| {
            let mut u = [0.0; 16];
            for c in &mut u[range] {
                *c = rng.random_range(0.1..1.0);
            }
            let n = u.iter().map(|c| c * c).sum::<f64>().sqrt();
            u.iter().map(|c| c * r0 / n).collect::<Vec<_>>()
        };
        let low = ModalState::new(0.0, shaped(0..k0 - 1, &mut rng), &lambdas);
        let high = ModalState::new(0.0, shaped(k0 - 1..16, &mut rng), &lambdas);
        let verdict = |s: &ModalState| -> Result<VerdictTag, String> {
            let rec = run(&problem, s, 10.0, 0.05, StepControl::default()).map_err(|e| e.to_string())?;
            Ok(classify_trajectory(&rec, 0.0).map_err(|e| e.to_string())?.tag)
        };
        let up = verdict(&low)?;
        let down = verdict(&high)?;
        ensure(
            matches!(up, VerdictTag::BlowUp { .. } | VerdictTag::GrowthUnbounded),
            format!("k0 = {k0}: low-mode data gave {}", up.name()),
        )?;
        ensure(
            matches!(down, VerdictTag::DecayToZero),
            format!("k0 = {k0}: high-mode data gave {}", down.name()),
        )?;
        detail.push(format!("k0={k0}: {}/{}", up.name(), down.name()));
    }
    Ok(detail.join(", "))
}

const CROSS_SCENARIO: &str = r#"
seed = 9
[domain]
kind = "interval"
length = 3.141592653589793
modes = 64
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
field = { kind = "parabola", amplitude = 0.5 }
[solver]
horizon = 1.0
cadence = 0.05
"#;

fn cross_validation() -> Check {
    let scenario = ScenarioConfig::from_toml_str(CROSS_SCENARIO)
        .and_then(|c| c.build())
        .map_err(|e| e.to_string())?;
    let report = compare_solvers(&scenario, 512, &[1.0]).map_err(|e| e.to_string())?;
    let diff = report.checkpoints[0].l2_diff;
    ensure(diff < CROSS_L2, format!("L2 difference {diff:.2e}"))?;
    let errors = heat_convergence(&[16, 32, 64, 128], 0.5).map_err(|e| e.to_string())?;
    let orders = observed_orders(&errors);
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(min >= FD_ORDER, format!("observed orders {orders:?}"))?;
    Ok(format!("L2 diff {diff:.1e} at T=1, FD orders min {min:.3}"))
}

fn energy_identity(runs: &[(SandwichRun, EnergyParams)]) -> Check {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for name in [
        "scenarios/dissipative.toml",
        "scenarios/decay.toml",
        "scenarios/blowup.toml",
    ] {
        let s = load_scenario(name);
        let record = run_scenario(&s).map_err(|e| e.to_string())?;
        let res = energy_identity_residual(&record, &ModalProblem::from_scenario(&s)).map_err(|e| e.to_string())?;
        ensure(res < ENERGY_REL, format!("{name}: residual {res:.2e}"))?;
        worst = worst.max(res);
        count += 1;
    }
    for (run, _) in runs {
        let res = energy_identity_residual(&run.record, &run.problem).map_err(|e| e.to_string())?;
        ensure(res < ENERGY_REL, format!("random run: residual {res:.2e}"))?;
        worst = worst.max(res);
        count += 1;
    }
    Ok(format!("{count} runs, worst residual {worst:.1e}"))
}

const BALANCED_SWEEP: &str = r#"
seed = 17
split = 2
separation = true

[base]
seed = 1
[base.domain]
kind = "interval"
length = 3.141592653589793
modes = 8
[base.coefficients]
a = { kind = "constant", value = 1.0 }
b = { kind = "constant", value = 1.0 }
f = { kind = "constant", value = 0.1 }
g = { kind = "constant", value = 0.5 }
[base.exponents]
p = 3.0
p0 = { kind = "piecewise_linear", knots = [[0.0, 2.0], [0.01, 0.0]] }
p1 = { kind = "constant", value = 2.0 }
[base.initial]
start = "t1"
modes = [1.0, 1.0, 0.5]
[base.solver]
horizon = 5.0
cadence = 0.05

[[axes]]
name = "r0"
values = [2.2, 2.5]

[[axes]]
name = "ratio"
values = [0.8, 1.0, 1.25]
"#;

fn separation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst = 0.0f64;
    for case in 0..5 {
        let a = rng.random_range(0.5..2.0);
        let b = rng.random_range(0.0..1.0);
        let problem = degenerate_problem(PI, 8, Averaged::constant(a, b, 0.0, 0.0), 2.0);
        let mut u0: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        u0[0] = 1.0;
        let s0 = ModalState::new(0.0, u0, problem.lambdas());
        let res =
            separation_exponent(&problem, &s0, 1e-8, 10.0, case, StepControl::default()).map_err(|e| e.to_string())?;
        let expected = -(a * problem.lambdas()[0] + b);
        let rel = (res.exponent - expected).abs() / expected.abs();
        ensure(
            rel <= SEPARATION_REL,
            format!("case {case}: {} vs {expected}", res.exponent),
        )?;
        worst = worst.max(rel);
    }
    let spec = SweepSpec::from_toml_str(BALANCED_SWEEP).map_err(|e| e.to_string())?;
    let cells = run_sweep(&spec, 2).map_err(|e| e.to_string())?;
    let mut values = Vec::new();
    for c in &cells {
        ensure(c.error.is_none(), format!("cell {}: {:?}", c.index, c.error))?;
        let v = c.separation.ok_or(format!("cell {} recorded no exponent", c.index))?;
        values.push(format!("{v:.3}"));
    }
    Ok(format!(
        "linear worst rel {worst:.1e}; balanced cells [{}]",
        values.join(", ")
    ))
}

fn determinism() -> Check {
    let nlrd = env!("CARGO_BIN_EXE_nlrd");
    let scenario = repo_file("scenarios/dissipative.toml");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(nlrd)
            .args([
                "run",
                scenario.to_str().unwrap(),
                "--separation",
                "--write-modes",
                "--out",
            ])
            .arg(dir.path())
            .env_remove("NLRD_OUT")
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), format!("run exited with {status}"))?;
        let csv = std::fs::read(dir.path().join("trajectory.csv")).map_err(|e| e.to_string())?;
        let manifest = std::fs::read(dir.path().join("manifest.json")).map_err(|e| e.to_string())?;
        runs.push((csv, manifest));
    }
    ensure(runs[0] == runs[1], "repeated runs differ")?;

    let spec_path = repo_file("scenarios/straddle_sweep.toml");
    let mut sweeps = Vec::new();
    for k in ["1", "4", "1", "4"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(nlrd)
            .args(["sweep", spec_path.to_str().unwrap(), "--parallel", k, "--out"])
            .arg(dir.path())
            .env_remove("NLRD_OUT")
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), format!("sweep exited with {status}"))?;
        sweeps.push(std::fs::read(dir.path().join("sweep.csv")).map_err(|e| e.to_string())?);
    }
    ensure(
        sweeps.windows(2).all(|w| w[0] == w[1]),
        "sweep output depends on the worker count",
    )?;

    let spec = SweepSpec::from_toml_str(BALANCED_SWEEP).map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for k in [1, 4] {
        let cells = run_sweep(&spec, k).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_sweep_csv(&spec, &cells, &mut buf).map_err(|e| e.to_string())?;
        bytes.push(buf);
    }
    ensure(bytes[0] == bytes[1], "separation sweep depends on the worker count")?;
    Ok("run x2, sweep K in {1, 4} x2, separation sweep K in {1, 4}: byte-identical".into())
}

fn main() {
    let runs = sandwich_runs();
    let with_runs = |f: fn(&[(SandwichRun, EnergyParams)]) -> Check| -> Check {
        match &runs {
            Ok(r) => f(r),
            Err(e) => Err(format!("setup failed: {e}")),
        }
    };
    let results: Vec<(&str, Check)> = vec![
        ("Young bound tightness", young_tightness()),
        ("constant-exponent blow-up time", blowup_time_exactness()),
        ("variable-exponent bracket root", variable_exponent_root()),
        ("linear decay exactness", linear_decay()),
        ("envelope sandwich", with_runs(envelope_sandwich)),
        ("low/high mode dichotomy", dichotomy()),
        ("spectral vs finite differences", cross_validation()),
        ("energy identity residual", with_runs(energy_identity)),
        ("separation exponent", separation()),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, res)) in results.iter().enumerate() {
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
