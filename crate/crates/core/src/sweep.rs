//! Parameter sweeps over a base scenario, run on a worker pool.
//!
//! A sweep spec is TOML:
//!
//! ```toml
//! seed = 11
//! base_file = "scenario.toml"   # relative to the spec, or an inline [base] table
//! split = 2                     # P holds modes 1..split-1 for the `ratio` axis
//! separation = false            # compute a separation exponent per cell
//! eta = 1e-8
//!
//! [[axes]]
//! name = "r0"                   # r0 | ratio | p1 | g
//! values = [0.5, 2.0]
//!
//! [[axes]]
//! name = "ratio"
//! start = 0.0
//! stop = 4.0
//! count = 5
//! ```
//!
//! Cells are the Cartesian product of the axes, numbered with the first
//! axis varying slowest.

use std::io::Write;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{Field, Scenario, ScenarioConfig, Schedule};
use crate::spectral::{
    classify_trajectory, compute_k0, run_scenario, separation_exponent, ModalProblem, ModalState, StepControl,
    VerdictTag,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// Initial norm ||u0||.
    R0,
    /// ||P u0|| / ||Q u0|| at fixed norm; `inf` is pure P.
    Ratio,
    /// Constant value of p1.
    P1,
    /// Constant value of g.
    G,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::R0 => "r0",
            AxisName::Ratio => "ratio",
            AxisName::P1 => "p1",
            AxisName::G => "g",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(_), Some(_), Some(n)) if n > MAX_CELLS => {
                return Err(Error::config(format!(
                    "axis `{}` count {n} is too large",
                    self.name.as_str()
                )))
            }
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            },
            _ => {
                return Err(Error::config(format!(
                    "axis `{}` needs either `values` or all of `start`, `stop`, `count`",
                    self.name.as_str()
                )))
            }
        };
        if v.iter().any(|x| x.is_nan()) {
            return Err(Error::config(format!("axis `{}` contains NaN", self.name.as_str())));
        }
        Ok(v)
    }
}

const MAX_CELLS: usize = 1_000_000;

fn default_split() -> usize {
    2
}

fn default_eta() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ScenarioConfig>,
    #[serde(default = "default_split")]
    pub split: usize,
    #[serde(default)]
    pub separation: bool,
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub axes: Vec<Axis>,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub values: Vec<(AxisName, f64)>,
}

impl SweepSpec {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let spec: Self = toml::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    /// Reads a spec file and resolves `base_file` relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let mut spec = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let Some(file) = spec.base_file.take() {
            let base_path = path.parent().unwrap_or(Path::new(".")).join(file);
            spec.base = Some(ScenarioConfig::from_toml_str(&std::fs::read_to_string(base_path)?)?);
        }
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.base.is_some() == self.base_file.is_some() {
            return Err(Error::config("sweep needs exactly one of `base_file` or `[base]`"));
        }
        if self.split < 2 {
            return Err(Error::config("split must be at least 2 so both P and Q are nonempty"));
        }
        if !(self.eta > 0.0) {
            return Err(Error::config("eta must be positive"));
        }
        if self.axes.is_empty() {
            return Err(Error::config("sweep has no axes"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.values()?;
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::config(format!("axis `{}` repeated", a.name.as_str())));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> Result<Vec<Cell>> {
        let axes: Vec<(AxisName, Vec<f64>)> = self
            .axes
            .iter()
            .map(|a| Ok((a.name, a.values()?)))
            .collect::<Result<_>>()?;
        if axes.iter().any(|(_, v)| v.is_empty()) {
            return Err(Error::config("sweep grid is empty"));
        }
        let total = axes
            .iter()
            .try_fold(1usize, |acc, (_, v)| {
                acc.checked_mul(v.len()).filter(|t| *t <= MAX_CELLS)
            })
            .ok_or_else(|| Error::config(format!("sweep grid exceeds {MAX_CELLS} cells")))?;
        Ok((0..total)
            .map(|index| {
                let mut rest = index;
                let mut values = vec![(AxisName::R0, 0.0); axes.len()];
                for (slot, (name, vals)) in values.iter_mut().zip(&axes).rev() {
                    *slot = (*name, vals[rest % vals.len()]);
                    rest /= vals.len();
                }
                Cell { index, values }
            })
            .collect())
    }

    /// Seed of a cell: word from the ChaCha stream numbered by the cell.
    pub fn cell_seed(&self, index: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng.next_u64()
    }

    /// Scenario of a cell.
    pub fn cell_scenario(&self, cell: &Cell) -> Result<(ScenarioConfig, Scenario)> {
        let mut config = self
            .base
            .clone()
            .ok_or_else(|| Error::config("sweep base is not resolved"))?;
        config.seed = self.cell_seed(cell.index);
        for (name, v) in &cell.values {
            match name {
                AxisName::P1 => config.exponents.p1 = Schedule::constant(*v),
                AxisName::G => config.coefficients.g = Field::constant(*v),
                AxisName::R0 | AxisName::Ratio => {}
            }
        }
        let lookup = |n: AxisName| cell.values.iter().find(|(m, _)| *m == n).map(|(_, v)| *v);
        let (r0, ratio) = (lookup(AxisName::R0), lookup(AxisName::Ratio));
        if r0.is_some() || ratio.is_some() {
            let base = config.build()?;
            let coeffs = reshape_initial(&base.initial, self.split, r0, ratio)?;
            config.initial.modes = Some(coeffs);
            config.initial.field = None;
        }
        let scenario = config.build()?;
        Ok((config, scenario))
    }
}

/// Rescales the P and Q parts of `c` to the requested norm and ratio.
fn reshape_initial(c: &[f64], split: usize, r0: Option<f64>, ratio: Option<f64>) -> Result<Vec<f64>> {
    let n = c.len();
    let cut = (split - 1).min(n);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let total = norm(c);
    let target = r0.unwrap_or(total);
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::config(format!(
            "r0 must be finite and nonnegative, got {target}"
        )));
    }
    let Some(rho) = ratio else {
        if total == 0.0 {
            return Err(Error::config("cannot rescale zero initial data"));
        }
        return Ok(c.iter().map(|x| x * target / total).collect());
    };
    if !(rho >= 0.0) {
        return Err(Error::config(format!("ratio must be nonnegative, got {rho}")));
    }
    if cut >= n {
        return Err(Error::config("split leaves no Q modes"));
    }
    let unit = |part: &[f64], fallback: usize, len: usize| -> Vec<f64> {
        let m = norm(part);
        if m > 0.0 {
            part.iter().map(|x| x / m).collect()
        } else {
            let mut e = vec![0.0; len];
            e[fallback] = 1.0;
            e
        }
    };
    let p_dir = unit(&c[..cut], 0, cut);
    let q_dir = unit(&c[cut..], 0, n - cut);
    let (p_norm, q_norm) = if rho.is_infinite() {
        (target, 0.0)
    } else {
        let q = target / (1.0 + rho * rho).sqrt();
        (rho * q, q)
    };
    Ok(p_dir
        .iter()
        .map(|x| x * p_norm)
        .chain(q_dir.iter().map(|x| x * q_norm))
        .collect())
}

/// Outcome of one cell; failures are kept in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub inputs: Vec<f64>,
    pub seed: u64,
    pub r0: f64,
    pub k0_start: usize,
    pub verdict: String,
    pub r_min: f64,
    pub r_max: f64,
    pub blowup_time: Option<f64>,
    pub separation: Option<f64>,
    pub separation_truncated: bool,
    pub error: Option<String>,
}

fn run_cell(spec: &SweepSpec, cell: &Cell) -> CellResult {
    let mut out = CellResult {
        index: cell.index,
        inputs: cell.values.iter().map(|(_, v)| *v).collect(),
        seed: spec.cell_seed(cell.index),
        r0: f64::NAN,
        k0_start: 0,
        verdict: "failed".into(),
        r_min: f64::NAN,
        r_max: f64::NAN,
        blowup_time: None,
        separation: None,
        separation_truncated: false,
        error: None,
    };
    let result = (|| -> Result<()> {
        let (_, scenario) = spec.cell_scenario(cell)?;
        let problem = ModalProblem::from_scenario(&scenario);
        out.r0 = scenario.initial_norm();
        out.k0_start = compute_k0(scenario.start, out.r0, &problem).index;
        let record = run_scenario(&scenario)?;
        let verdict = classify_trajectory(&record, scenario.solver.tail_window)?;
        out.verdict = verdict.tag.name().to_string();
        out.r_min = verdict.stats.r_min;
        out.r_max = verdict.stats.r_max;
        if let VerdictTag::BlowUp { time } = verdict.tag {
            out.blowup_time = Some(time);
        }
        if spec.separation {
            let initial = ModalState::new(scenario.start, scenario.initial.clone(), problem.lambdas());
            let control = StepControl {
                rtol: scenario.solver.rtol,
                atol: scenario.solver.atol,
                guard: scenario.solver.guard,
                ..StepControl::default()
            };
            let horizon = scenario.horizon() - scenario.start;
            let sep = separation_exponent(&problem, &initial, spec.eta, horizon, scenario.seed, control)?;
            out.separation = Some(sep.exponent).filter(|e| e.is_finite());
            out.separation_truncated = sep.truncated;
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.error = Some(e.to_string());
    }
    out
}

/// Runs every cell on a pool of `parallel` workers; results come back in
/// cell order whatever the pool size.
pub fn run_sweep(spec: &SweepSpec, parallel: usize) -> Result<Vec<CellResult>> {
    let cells = spec.cells()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let mut results: Vec<CellResult> = pool.install(|| cells.par_iter().map(|c| run_cell(spec, c)).collect());
    results.sort_by_key(|r| r.index);
    Ok(results)
}

/// Writes the regime map: one row per cell.
pub fn write_sweep_csv<W: Write>(spec: &SweepSpec, results: &[CellResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["cell".to_string()];
    header.extend(spec.axes.iter().map(|a| a.name.as_str().to_string()));
    header.extend(
        [
            "seed",
            "u0_norm",
            "k0_start",
            "verdict",
            "r_min",
            "r_max",
            "blowup_time",
            "separation",
            "separation_truncated",
            "error",
        ]
        .map(String::from),
    );
    out.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in results {
        let mut row = vec![r.index.to_string()];
        row.extend(r.inputs.iter().map(|v| fmt_f64(*v)));
        row.extend([
            r.seed.to_string(),
            fmt_f64(r.r0),
            r.k0_start.to_string(),
            r.verdict.clone(),
            fmt_f64(r.r_min),
            fmt_f64(r.r_max),
            opt(r.blowup_time),
            opt(r.separation),
            r.separation_truncated.to_string(),
            r.error.clone().unwrap_or_default(),
        ]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
