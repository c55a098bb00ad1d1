//! Closed-form coefficient fields a(x), b(x), f(t,x), g(t,x).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::domain::{DomainKind, Point, SpectralDomain};
use crate::error::{Error, Result};

/// Spatial profile of a coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// base + slope_x x + slope_y y
    Affine {
        base: f64,
        slope_x: f64,
        #[serde(default)]
        slope_y: f64,
    },
    /// base + amplitude sin(pi x / Lx) [sin(pi y / Ly)]
    Sine {
        base: f64,
        amplitude: f64,
    },
    /// base + amplitude cos(2 pi waves x / Lx)
    Cosine {
        base: f64,
        amplitude: f64,
        waves: f64,
    },
}

impl Profile {
    pub fn eval(&self, p: Point, kind: DomainKind) -> f64 {
        let (lx, ly) = match kind {
            DomainKind::Interval { length } => (length, None),
            DomainKind::Rectangle { lx, ly } => (lx, Some(ly)),
        };
        match *self {
            Profile::Constant { value } => value,
            Profile::Affine { base, slope_x, slope_y } => base + slope_x * p.x + slope_y * p.y,
            Profile::Sine { base, amplitude } => {
                let sy = ly.map_or(1.0, |ly| (PI * p.y / ly).sin());
                base + amplitude * (PI * p.x / lx).sin() * sy
            }
            Profile::Cosine { base, amplitude, waves } => base + amplitude * (2.0 * PI * waves * p.x / lx).cos(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        match *self {
            Profile::Constant { .. } => true,
            Profile::Affine { slope_x, slope_y, .. } => slope_x == 0.0 && slope_y == 0.0,
            Profile::Sine { amplitude, .. } | Profile::Cosine { amplitude, .. } => amplitude == 0.0,
        }
    }
}

/// Multiplicative time factor of a coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modulation {
    #[default]
    None,
    /// 1 + amplitude (1 - e^{-rate t})
    Saturating { amplitude: f64, rate: f64 },
    /// 1 + amplitude e^{-rate t}
    Relaxing { amplitude: f64, rate: f64 },
    /// 1 + amplitude sin(2 pi frequency t)
    Periodic { amplitude: f64, frequency: f64 },
}

impl Modulation {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Modulation::None => 1.0,
            Modulation::Saturating { amplitude, rate } => 1.0 + amplitude * (1.0 - (-rate * t).exp()),
            Modulation::Relaxing { amplitude, rate } => 1.0 + amplitude * (-rate * t).exp(),
            Modulation::Periodic { amplitude, frequency } => 1.0 + amplitude * (2.0 * PI * frequency * t).sin(),
        }
    }
}

/// profile(x) * modulation(t)
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    #[serde(flatten)]
    pub space: Profile,
    #[serde(default, skip_serializing_if = "is_none_modulation")]
    pub time: Modulation,
}

fn is_none_modulation(m: &Modulation) -> bool {
    matches!(m, Modulation::None)
}

impl Field {
    pub fn constant(value: f64) -> Self {
        Self {
            space: Profile::Constant { value },
            time: Modulation::None,
        }
    }

    pub fn new(space: Profile, time: Modulation) -> Self {
        Self { space, time }
    }

    pub fn eval(&self, t: f64, p: Point, kind: DomainKind) -> f64 {
        self.space.eval(p, kind) * self.time.eval(t)
    }

    /// Domain average of the spatial profile.
    pub fn space_mean(&self, domain: &SpectralDomain) -> f64 {
        let kind = domain.kind();
        match self.space {
            Profile::Constant { value } => value,
            _ => super::domain::mean_coefficient(|p| self.space.eval(p, kind), domain),
        }
    }

    /// Domain average at time t (the modulation factors out).
    pub fn mean(&self, t: f64, domain: &SpectralDomain) -> f64 {
        self.space_mean(domain) * self.time.eval(t)
    }
}

/// Lower and upper bounds of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// The four coefficient fields. `a` and `b` must not carry a time
/// modulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSet {
    pub a: Field,
    pub b: Field,
    pub f: Field,
    pub g: Field,
}

/// Cached bounds a0 <= a <= A0 and so on over a time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    pub a: Bounds,
    pub b: Bounds,
    pub f: Bounds,
    pub g: Bounds,
}

const TIME_SAMPLES: usize = 257;

fn field_bounds(field: &Field, grid: &[Point], kind: DomainKind, t_lo: f64, t_hi: f64) -> Bounds {
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let times: Vec<f64> = if matches!(field.time, Modulation::None) || t_hi <= t_lo {
        vec![t_lo]
    } else {
        (0..TIME_SAMPLES)
            .map(|i| t_lo + (t_hi - t_lo) * i as f64 / (TIME_SAMPLES - 1) as f64)
            .collect()
    };
    let space: Vec<f64> = grid.iter().map(|&p| field.space.eval(p, kind)).collect();
    for t in times {
        let m = field.time.eval(t);
        for s in &space {
            let v = s * m;
            lower = lower.min(v);
            upper = upper.max(v);
        }
    }
    Bounds { lower, upper }
}

impl CoefficientSet {
    pub fn constant(a: f64, b: f64, f: f64, g: f64) -> Self {
        Self {
            a: Field::constant(a),
            b: Field::constant(b),
            f: Field::constant(f),
            g: Field::constant(g),
        }
    }

    /// Bounds sampled on the verification grid and on a time grid over
    /// [t_lo, t_hi].
    pub fn bounds(&self, domain: &SpectralDomain, t_lo: f64, t_hi: f64) -> CoefficientBounds {
        let grid = domain.verification_grid();
        let kind = domain.kind();
        CoefficientBounds {
            a: field_bounds(&self.a, &grid, kind, 0.0, 0.0),
            b: field_bounds(&self.b, &grid, kind, 0.0, 0.0),
            f: field_bounds(&self.f, &grid, kind, t_lo, t_hi),
            g: field_bounds(&self.g, &grid, kind, t_lo, t_hi),
        }
    }

    /// Checks positivity of every field on [0, horizon] and b(x) > g(0, x).
    pub fn validate(&self, domain: &SpectralDomain, horizon: f64) -> Result<CoefficientBounds> {
        if !matches!(self.a.time, Modulation::None) || !matches!(self.b.time, Modulation::None) {
            return Err(Error::config("coefficients a and b are time independent"));
        }
        let bounds = self.bounds(domain, 0.0, horizon);
        for (name, b) in [("a", bounds.a), ("b", bounds.b), ("f", bounds.f), ("g", bounds.g)] {
            if !(b.lower > 0.0) || !b.upper.is_finite() {
                return Err(Error::config(format!(
                    "coefficient {name} must be positive and finite on the domain (min {:.6e})",
                    b.lower
                )));
            }
        }
        let kind = domain.kind();
        for p in domain.verification_grid() {
            let b = self.b.eval(0.0, p, kind);
            let g = self.g.eval(0.0, p, kind);
            if !(b > g) {
                return Err(Error::config(format!(
                    "b(x) must exceed g(0, x); violated at x = ({:.4}, {:.4}) with b = {b}, g = {g}",
                    p.x, p.y
                )));
            }
        }
        Ok(bounds)
    }

    pub fn is_uniform(&self) -> bool {
        self.a.space.is_uniform() && self.b.space.is_uniform() && self.f.space.is_uniform() && self.g.space.is_uniform()
    }
}
