//! Scenario definition and its TOML configuration file.
//!
//! A scenario file has five sections:
//!
//! ```toml
//! seed = 7                      # optional, default 0
//!
//! [domain]
//! kind = "interval"             # or "rectangle" with lx, ly
//! length = 3.141592653589793
//! modes = 64
//!
//! [coefficients]
//! a = { kind = "constant", value = 1.0 }
//! b = { kind = "affine", base = 2.0, slope_x = 0.1 }
//! f = { kind = "constant", value = 0.5, time = { kind = "relaxing", amplitude = 1.0, rate = 0.5 } }
//! g = { kind = "constant", value = 1.0 }
//!
//! [exponents]
//! p = 3.0
//! p0 = { kind = "piecewise_linear", knots = [[0.0, 2.0], [1.0, 0.0]] }
//! p1 = { kind = "saturating", amplitude = 2.0, rate = 1.0 }
//!
//! [initial]
//! start = "t1"                  # or a number, default 0
//! modes = [1.0, 0.0, 0.2]       # or: field = { kind = "parabola", amplitude = 1.0 }
//!
//! [solver]
//! horizon = 10.0
//! cadence = 0.01
//! ```

use serde::{Deserialize, Serialize};

use super::domain::{project_initial, DomainKind, Point, SpectralDomain};
use super::fields::{CoefficientBounds, CoefficientSet};
use super::schedule::{ExponentSchedule, SwitchTimes};
use crate::error::{Error, Result};

/// Geometry and basis size of the `[domain]` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { length: f64, modes: usize },
    Rectangle { lx: f64, ly: f64, modes: usize },
}

impl DomainConfig {
    pub fn kind(&self) -> DomainKind {
        match *self {
            DomainConfig::Interval { length, .. } => DomainKind::Interval { length },
            DomainConfig::Rectangle { lx, ly, .. } => DomainKind::Rectangle { lx, ly },
        }
    }

    pub fn modes(&self) -> usize {
        match *self {
            DomainConfig::Interval { modes, .. } | DomainConfig::Rectangle { modes, .. } => modes,
        }
    }

    pub fn set_modes(&mut self, n: usize) {
        match self {
            DomainConfig::Interval { modes, .. } | DomainConfig::Rectangle { modes, .. } => *modes = n,
        }
    }
}

/// Closed-form initial fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialField {
    /// amplitude x (L - x) [y (Ly - y)]
    Parabola { amplitude: f64 },
    /// amplitude sin(i pi x / Lx) [sin(j pi y / Ly)]
    Sine {
        amplitude: f64,
        #[serde(default = "one")]
        i: usize,
        #[serde(default = "one")]
        j: usize,
    },
    /// amplitude exp(-|x - c|^2 / width^2), cut to zero at the boundary
    /// by the Dirichlet projection.
    Gaussian {
        amplitude: f64,
        center_x: f64,
        #[serde(default)]
        center_y: f64,
        width: f64,
    },
}

fn one() -> usize {
    1
}

impl InitialField {
    pub fn eval(&self, p: Point, kind: DomainKind) -> f64 {
        use std::f64::consts::PI;
        match (self.clone(), kind) {
            (InitialField::Parabola { amplitude }, DomainKind::Interval { length }) => amplitude * p.x * (length - p.x),
            (InitialField::Parabola { amplitude }, DomainKind::Rectangle { lx, ly }) => {
                amplitude * p.x * (lx - p.x) * p.y * (ly - p.y)
            }
            (InitialField::Sine { amplitude, i, .. }, DomainKind::Interval { length }) => {
                amplitude * (i as f64 * PI * p.x / length).sin()
            }
            (InitialField::Sine { amplitude, i, j }, DomainKind::Rectangle { lx, ly }) => {
                amplitude * (i as f64 * PI * p.x / lx).sin() * (j as f64 * PI * p.y / ly).sin()
            }
            (
                InitialField::Gaussian {
                    amplitude,
                    center_x,
                    center_y,
                    width,
                },
                kind,
            ) => {
                let dy = if matches!(kind, DomainKind::Rectangle { .. }) {
                    p.y - center_y
                } else {
                    0.0
                };
                let dx = p.x - center_x;
                amplitude * (-(dx * dx + dy * dy) / (width * width)).exp()
            }
        }
    }
}

/// Start time of the run: a number or the switch time t1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartTime {
    At(f64),
    Named(String),
}

impl Default for StartTime {
    fn default() -> Self {
        StartTime::At(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub start: StartTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<InitialField>,
}

/// Numerical settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// End time T of the run.
    pub horizon: f64,
    /// Output spacing of the trajectory record.
    pub cadence: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Blow-up guard on r = ||u||.
    pub guard: f64,
    /// Relative Parseval-defect tolerance of the initial projection.
    pub projection_tol: f64,
    /// Length of the tail window used to classify the trajectory; a
    /// non-positive value selects a quarter of the run.
    pub tail_window: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            cadence: 0.01,
            rtol: 1e-9,
            atol: 1e-14,
            guard: 1e6,
            projection_tol: 1e-6,
            tail_window: 0.0,
        }
    }
}

/// The scenario file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    pub domain: DomainConfig,
    pub coefficients: CoefficientSet,
    pub exponents: ExponentSchedule,
    pub initial: InitialConfig,
    #[serde(default)]
    pub solver: SolverSettings,
}

impl ScenarioConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Validates the configuration and projects the initial data.
    pub fn build(&self) -> Result<Scenario> {
        let s = &self.solver;
        if !(s.horizon > 0.0 && s.horizon.is_finite()) {
            return Err(Error::config(format!("horizon must be positive, got {}", s.horizon)));
        }
        if !(s.cadence > 0.0 && s.cadence.is_finite()) {
            return Err(Error::config(format!("cadence must be positive, got {}", s.cadence)));
        }
        if !(s.rtol > 0.0 && s.atol > 0.0 && s.guard > 0.0 && s.projection_tol > 0.0) {
            return Err(Error::config("solver tolerances and guard must be positive"));
        }
        if self.domain.modes() > 4096 {
            return Err(Error::config("mode count above 4096 is not supported"));
        }
        let domain = SpectralDomain::build(self.domain.kind(), self.domain.modes())?;
        self.exponents.validate(s.horizon)?;
        let switch = self.exponents.switch_times(s.horizon);
        let bounds = self.coefficients.validate(&domain, s.horizon)?;

        let start = match &self.initial.start {
            StartTime::At(t) if *t >= 0.0 && t.is_finite() => *t,
            StartTime::At(t) => return Err(Error::config(format!("start time must be nonnegative, got {t}"))),
            StartTime::Named(name) if name == "t1" => switch
                .t1
                .ok_or_else(|| Error::config("start = \"t1\" but p0 never vanishes within the horizon"))?,
            StartTime::Named(name) => return Err(Error::config(format!("unknown start time `{name}`"))),
        };
        if start >= s.horizon {
            return Err(Error::config(format!(
                "start time {start} is not before the horizon {}",
                s.horizon
            )));
        }

        let (initial, projection_defect) = match (&self.initial.modes, &self.initial.field) {
            (Some(modes), None) => {
                if modes.len() > domain.mode_count() {
                    return Err(Error::config(format!(
                        "{} initial coefficients given for {} modes",
                        modes.len(),
                        domain.mode_count()
                    )));
                }
                let mut c = modes.clone();
                c.resize(domain.mode_count(), 0.0);
                (c, None)
            }
            (None, Some(field)) => {
                let kind = domain.kind();
                let proj = project_initial(|p| field.eval(p, kind), &domain, s.projection_tol)?;
                (proj.coefficients, Some(proj.parseval_defect))
            }
            _ => return Err(Error::config("[initial] needs exactly one of `modes` or `field`")),
        };
        let h1: f64 = initial.iter().zip(domain.modes()).map(|(c, m)| m.lambda * c * c).sum();
        if !h1.is_finite() {
            return Err(Error::config("initial data must have a finite H1_0 norm"));
        }

        Ok(Scenario {
            domain,
            coefficients: self.coefficients.clone(),
            exponents: self.exponents.clone(),
            initial,
            start,
            solver: *s,
            seed: self.seed,
            bounds,
            switch,
            projection_defect,
        })
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub domain: SpectralDomain,
    pub coefficients: CoefficientSet,
    pub exponents: ExponentSchedule,
    /// Modal coefficients of u at `start`.
    pub initial: Vec<f64>,
    pub start: f64,
    pub solver: SolverSettings,
    pub seed: u64,
    pub bounds: CoefficientBounds,
    pub switch: SwitchTimes,
    pub projection_defect: Option<f64>,
}

impl Scenario {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        ScenarioConfig::from_toml_str(src)?.build()
    }

    pub fn horizon(&self) -> f64 {
        self.solver.horizon
    }

    pub fn initial_norm(&self) -> f64 {
        self.initial.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}
