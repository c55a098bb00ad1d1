//! `nlrd`: run, analyse and sweep nonlocal reaction-diffusion scenarios.
//!
//! Exit codes: 0 bounded or decaying run, 3 blow-up detected, 1 integrator
//! or output failure, 2 configuration error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nonlocal_rd::blowup::{blowup_bracket, blowup_criterion, BoundMethod, BracketStatus};
use nonlocal_rd::energy::{EnergyParams, EnvelopeOptions};
use nonlocal_rd::manifest::analyze_run;
use nonlocal_rd::model::{Scenario, ScenarioConfig};
use nonlocal_rd::oracle::compare_solvers;
use nonlocal_rd::regimes::phase_timeline;
use nonlocal_rd::spectral::{
    classify_trajectory, run_scenario, separation_exponent, step_system, ModalProblem, ModalState, StepControl,
    StepOutcome,
};
use nonlocal_rd::sweep::{run_sweep, write_sweep_csv, SweepSpec};
use nonlocal_rd::Error;

#[derive(Parser)]
#[command(name = "nlrd", version, about = "Nonlocal reaction-diffusion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write trajectory.csv and manifest.json.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        out: OutDir,
        /// Also compute the separation exponent.
        #[arg(long)]
        separation: bool,
        /// Include the per-mode coefficients u_1..u_N in the CSV.
        #[arg(long)]
        write_modes: bool,
    },
    /// Report the blow-up criterion and bracket at the switch time t1.
    Bracket {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classify the long-time behaviour of a scenario (JSON on stdout).
    Classify {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Perturbation size of the twin trajectory.
        #[arg(long, default_value_t = 1e-8)]
        eta: f64,
    },
    /// Run a parameter sweep and write sweep.csv.
    Sweep {
        spec: PathBuf,
        #[command(flatten)]
        out: OutDir,
        /// Overrides the sweep seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Cross-check the spectral solver against finite differences.
    Compare {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Interior grid nodes of the finite-difference solver.
        #[arg(long, default_value_t = 512)]
        nodes: usize,
        /// Comparison times (default: the horizon).
        #[arg(long, value_delimiter = ',')]
        at: Vec<f64>,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    cadence: Option<f64>,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "NLRD_OUT", default_value = ".")]
    out: PathBuf,
}

/// Exit code with a message for standard error.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Integrator { .. } | Error::Io(_) | Error::Csv(_) => 1,
            _ => 2,
        };
        Failure(code, e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn load(path: &Path, overrides: &Overrides) -> Result<(ScenarioConfig, Scenario), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(2, format!("cannot read {}: {e}", path.display())))?;
    let mut config = ScenarioConfig::from_toml_str(&text)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(n) = overrides.modes {
        config.domain.set_modes(n);
    }
    if let Some(h) = overrides.horizon {
        config.solver.horizon = h;
    }
    if let Some(c) = overrides.cadence {
        config.solver.cadence = c;
    }
    let scenario = config.build()?;
    Ok((config, scenario))
}

fn control(s: &Scenario) -> StepControl {
    StepControl {
        rtol: s.solver.rtol,
        atol: s.solver.atol,
        guard: s.solver.guard,
        ..StepControl::default()
    }
}

/// Prints `text` as one line or block; a closed pipe on stdout is not an
/// error.
fn emit(text: &str) -> CmdResult {
    let mut stdout = std::io::stdout().lock();
    let end = if text.ends_with('\n') { "" } else { "\n" };
    match write!(stdout, "{text}{end}").and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure(1, format!("cannot write output: {e}"))),
        _ => Ok(0),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure(1, format!("cannot write {}: {e}", path.display())))
}

fn cmd_run(path: &Path, overrides: &Overrides, out: &Path, separation: bool, write_modes: bool) -> CmdResult {
    let (config, scenario) = load(path, overrides)?;
    let record = run_scenario(&scenario)?;
    let sep = if separation {
        let problem = ModalProblem::from_scenario(&scenario);
        let initial = ModalState::new(scenario.start, scenario.initial.clone(), problem.lambdas());
        let span = scenario.horizon() - scenario.start;
        Some(separation_exponent(
            &problem,
            &initial,
            1e-8,
            span,
            scenario.seed,
            control(&scenario),
        )?)
    } else {
        None
    };
    let mut manifest = analyze_run(&config, &scenario, &record, sep)?;
    fs::create_dir_all(out).map_err(|e| Failure(1, format!("cannot create {}: {e}", out.display())))?;
    let mut csv = Vec::new();
    record.write_csv(&mut csv, write_modes)?;
    write_file(&out.join("trajectory.csv"), &csv)?;
    manifest.files.push("trajectory.csv".into());
    manifest.files.push("manifest.json".into());
    write_file(&out.join("manifest.json"), manifest.to_json_string()?.as_bytes())?;
    match &record.blowup {
        Some(ev) => {
            eprintln!(
                "blow-up at t = {:.10e} (guard crossed at {:.10e})",
                ev.time, ev.guard_time
            );
            Ok(3)
        }
        None => {
            if let Some(v) = &manifest.verdict {
                eprintln!("verdict: {}", v.tag.name());
            }
            Ok(0)
        }
    }
}

fn cmd_bracket(path: &Path, overrides: &Overrides) -> CmdResult {
    emit(&bracket_report(path, overrides)?)
}

fn bracket_report(path: &Path, overrides: &Overrides) -> Result<String, Failure> {
    let (_, scenario) = load(path, overrides)?;
    let mut out = String::new();
    let Some(t1) = scenario.switch.t1.filter(|t| *t >= scenario.start) else {
        let mut msg = String::from("p0 does not reach 0 within the horizon; phases:");
        for iv in phase_timeline(&scenario.exponents, scenario.start, scenario.horizon(), 512) {
            msg.push_str(&format!("\n  [{:.6}, {:.6}] {}", iv.start, iv.end, iv.tag));
        }
        return Err(Failure(2, msg));
    };
    let problem = ModalProblem::from_scenario(&scenario);
    let initial = ModalState::new(scenario.start, scenario.initial.clone(), problem.lambdas());
    let state = match step_system(&problem, &initial, t1 - scenario.start, control(&scenario))? {
        StepOutcome::Advanced(s) => s,
        StepOutcome::BlowUp { event, .. } => {
            writeln!(out, "blow-up before t1 = {t1}: t* = {:.10e}", event.time).unwrap();
            return Ok(out);
        }
    };
    let crit = blowup_criterion(
        &state.coeffs,
        t1,
        &scenario.domain,
        &scenario.coefficients,
        &scenario.exponents,
    )?;
    writeln!(out, "t1 = {t1:.10e}").unwrap();
    writeln!(out, "criterion delta = {:.10e}", crit.delta).unwrap();
    if !crit.blows_up {
        writeln!(out, "no blow-up predicted").unwrap();
        return Ok(out);
    }
    let lambdas = problem.lambdas();
    let lambda_top = state
        .coeffs
        .iter()
        .zip(lambdas)
        .filter(|(c, _)| **c != 0.0)
        .map(|(_, l)| *l)
        .fold(lambdas[0], f64::max);
    let params = EnergyParams::from_bounds(&scenario.bounds, lambdas[0], scenario.exponents.p1.clone())?
        .with_lambda_top(lambda_top)?;
    let y1 = state.r * state.r;
    let upper = nonlocal_rd::blowup::blowup_time_upper(y1, t1, &params);
    let lower = nonlocal_rd::blowup::blowup_time_lower(y1, t1, &params);
    let fmt = |t: Option<f64>| t.map_or("none".to_string(), |t| format!("{t:.10e}"));
    writeln!(out, "time from (a0 lambda1, G0): {}", fmt(upper)).unwrap();
    writeln!(out, "time from (A0 lambda1 + B1, g0): {}", fmt(lower)).unwrap();
    let b = blowup_bracket(
        y1,
        t1,
        crit.delta,
        &params,
        scenario.horizon() - t1,
        &EnvelopeOptions::default(),
    )?;
    match b.status {
        BracketStatus::NoBlowupDetected => writeln!(out, "no blow-up detected").unwrap(),
        _ => writeln!(
            out,
            "bracket = [{}, {}] (lower: {}, upper: {})",
            fmt(b.t_lower),
            fmt(b.t_upper),
            method(b.lower_method),
            method(b.upper_method)
        )
        .unwrap(),
    }
    Ok(out)
}

fn method(m: Option<BoundMethod>) -> &'static str {
    match m {
        Some(BoundMethod::ClosedForm) => "closed form",
        Some(BoundMethod::EnvelopeSingularity) => "envelope singularity",
        None => "none",
    }
}

fn cmd_classify(path: &Path, overrides: &Overrides, eta: f64) -> CmdResult {
    let (_, scenario) = load(path, overrides)?;
    let record = run_scenario(&scenario)?;
    let mut verdict = classify_trajectory(&record, scenario.solver.tail_window)?;
    if record.blowup.is_none() {
        let problem = ModalProblem::from_scenario(&scenario);
        let initial = ModalState::new(scenario.start, scenario.initial.clone(), problem.lambdas());
        let span = scenario.horizon() - scenario.start;
        let sep = separation_exponent(&problem, &initial, eta, span, scenario.seed, control(&scenario))?;
        verdict.stats.separation_exponent = Some(sep.exponent).filter(|e| e.is_finite());
    }
    emit(&serde_json::to_string_pretty(&verdict).map_err(Error::from)?)
}

fn cmd_sweep(path: &Path, out: &Path, seed: Option<u64>, parallel: usize) -> CmdResult {
    let mut spec = SweepSpec::load(path).map_err(|e| match e {
        Error::Io(io) => Failure(2, format!("cannot read sweep input: {io}")),
        other => other.into(),
    })?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let results = run_sweep(&spec, parallel)?;
    fs::create_dir_all(out).map_err(|e| Failure(1, format!("cannot create {}: {e}", out.display())))?;
    let mut csv = Vec::new();
    write_sweep_csv(&spec, &results, &mut csv)?;
    write_file(&out.join("sweep.csv"), &csv)?;
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} cells, {} failed", results.len(), failed);
    Ok(if failed == results.len() { 1 } else { 0 })
}

fn cmd_compare(path: &Path, overrides: &Overrides, nodes: usize, at: &[f64]) -> CmdResult {
    let (_, scenario) = load(path, overrides)?;
    let times = if at.is_empty() {
        vec![scenario.horizon()]
    } else {
        at.to_vec()
    };
    let report = compare_solvers(&scenario, nodes, &times)?;
    emit(&serde_json::to_string_pretty(&report).map_err(Error::from)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            overrides,
            out,
            separation,
            write_modes,
        } => cmd_run(scenario, overrides, &out.out, *separation, *write_modes),
        Command::Bracket { scenario, overrides } => cmd_bracket(scenario, overrides),
        Command::Classify {
            scenario,
            overrides,
            eta,
        } => cmd_classify(scenario, overrides, *eta),
        Command::Sweep {
            spec,
            out,
            seed,
            parallel,
        } => cmd_sweep(spec, &out.out, *seed, *parallel),
        Command::Compare {
            scenario,
            overrides,
            nodes,
            at,
        } => cmd_compare(scenario, overrides, *nodes, at),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
