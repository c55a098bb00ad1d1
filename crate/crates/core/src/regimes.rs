//! Phase classification of the exponent schedule and the Young-split
//! effective damping coefficient b1(t, x).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, ExponentSchedule, Point, SpectralDomain};

/// Band on p0 - p1 treated as exact equality.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTag {
    /// p0 > p1
    Dissipative,
    /// p0 = p1
    Critical,
    /// p1 > p0
    NonDissipative,
    /// p0 = 0
    Degenerate,
}

impl PhaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseTag::Dissipative => "dissipative",
            PhaseTag::Critical => "critical",
            PhaseTag::NonDissipative => "non_dissipative",
            PhaseTag::Degenerate => "degenerate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            PhaseTag::Dissipative,
            PhaseTag::Critical,
            PhaseTag::NonDissipative,
            PhaseTag::Degenerate,
        ]
        .into_iter()
        .find(|p| p.as_str() == s.trim())
    }

    fn rank(self) -> u8 {
        match self {
            PhaseTag::Dissipative => 0,
            PhaseTag::Critical => 1,
            PhaseTag::NonDissipative => 2,
            PhaseTag::Degenerate => 3,
        }
    }
}

impl std::fmt::Display for PhaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Phase tag from the exponents at a single time.
pub fn classify_exponents(p0: f64, p1: f64) -> PhaseTag {
    if p0 <= 0.0 {
        PhaseTag::Degenerate
    } else if (p0 - p1).abs() <= CRITICAL_TOLERANCE {
        PhaseTag::Critical
    } else if p0 > p1 {
        PhaseTag::Dissipative
    } else {
        PhaseTag::NonDissipative
    }
}

pub fn classify_phase(t: f64, schedule: &ExponentSchedule) -> PhaseTag {
    classify_exponents(schedule.p0(t), schedule.p1(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseInterval {
    pub tag: PhaseTag,
    pub start: f64,
    pub end: f64,
}

/// Partition of [start, end] into phase intervals. Transitions found on
/// a grid of `samples` points are refined by bisection; a sign change of
/// p0 - p1 between grid points yields a zero-length critical interval.
pub fn phase_timeline(schedule: &ExponentSchedule, start: f64, end: f64, samples: usize) -> Vec<PhaseInterval> {
    let n = samples.max(2);
    let at = |i: usize| start + (end - start) * i as f64 / (n - 1) as f64;
    let mut out: Vec<PhaseInterval> = Vec::new();
    let mut cur = classify_phase(start, schedule);
    let mut cur_start = start;
    let mut prev_t = start;
    let mut i = 1;
    while i < n {
        let t = at(i);
        if classify_phase(t, schedule) == cur {
            prev_t = t;
            i += 1;
            continue;
        }
        let (mut lo, mut hi) = (prev_t, t);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if classify_phase(mid, schedule) == cur {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        let next = classify_phase(hi, schedule);
        out.push(PhaseInterval {
            tag: cur,
            start: cur_start,
            end: hi,
        });
        if cur == PhaseTag::Dissipative && next == PhaseTag::NonDissipative {
            out.push(PhaseInterval {
                tag: PhaseTag::Critical,
                start: hi,
                end: hi,
            });
        }
        cur = next;
        cur_start = hi;
        prev_t = hi;
    }
    out.push(PhaseInterval {
        tag: cur,
        start: cur_start,
        end,
    });
    out
}

/// True when the tags of consecutive intervals never move backwards in
/// the order dissipative, critical, non-dissipative, degenerate.
pub fn is_ordered(timeline: &[PhaseInterval]) -> bool {
    timeline.windows(2).all(|w| w[0].tag.rank() <= w[1].tag.rank())
}

/// Tightest C with g s^p1 <= f s^p0 + C for all s >= 0, valid while
/// p0 > p1 >= 0.
pub fn young_gap_constant(f: f64, g: f64, p0: f64, p1: f64) -> Result<f64> {
    if !(f > 0.0 && g > 0.0) {
        return Err(Error::Domain(format!("Young bound needs f, g > 0 (f = {f}, g = {g})")));
    }
    if !(p0 > p1) || p1 < 0.0 {
        return Err(Error::phase(format!(
            "Young bound requires p0 > p1 >= 0 (p0 = {p0}, p1 = {p1})"
        )));
    }
    if p1 == 0.0 {
        return Ok(g);
    }
    let d = p0 - p1;
    let ratio = p1 / p0;
    let log_scale = (p1 / d) * ratio.ln() + (p0 * g.ln() - p1 * f.ln()) / d;
    Ok(log_scale.exp() * (1.0 - ratio))
}

/// b1(t, x) on the verification grid with its extrema over the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCoefficient {
    pub t: f64,
    pub values: Vec<f64>,
    /// b1(t) = inf_x b1(t, x)
    pub inf: f64,
    /// sup_x b1(t, x)
    pub sup: f64,
}

impl EffectiveCoefficient {
    fn from_values(t: f64, values: Vec<f64>) -> Self {
        let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { t, values, inf, sup }
    }

    /// b10 = inf_x |b1(t, x)|.
    pub fn inf_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
    }
}

fn on_grid(domain: &SpectralDomain, f: impl Fn(Point) -> Result<f64>) -> Result<Vec<f64>> {
    domain.verification_grid().into_iter().map(f).collect()
}

/// b1(t, x) = b(x) - young_gap_constant(f(t,x), g(t,x), p0(t), p1(t)) in
/// the dissipative phase.
pub fn compute_b1(
    t: f64,
    coefficients: &CoefficientSet,
    schedule: &ExponentSchedule,
    domain: &SpectralDomain,
) -> Result<EffectiveCoefficient> {
    let (p0, p1) = (schedule.p0(t), schedule.p1(t));
    let kind = domain.kind();
    let values = on_grid(domain, |p| {
        let gap = young_gap_constant(coefficients.f.eval(t, p, kind), coefficients.g.eval(t, p, kind), p0, p1)?;
        Ok(coefficients.b.eval(t, p, kind) - gap)
    })?;
    Ok(EffectiveCoefficient::from_values(t, values))
}

/// Effective pair in the non-dissipative phase: b1 = b - (p1-p0)/p1
/// (f^p1/g^p0)^{1/(p1-p0)} and g1 = (1 + p0/p1) g.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSplit {
    pub b1: EffectiveCoefficient,
    /// g10 = sup_x g1(t, x)
    pub g1_sup: f64,
}

pub fn compute_growth_split(
    t: f64,
    coefficients: &CoefficientSet,
    schedule: &ExponentSchedule,
    domain: &SpectralDomain,
) -> Result<GrowthSplit> {
    let (p0, p1) = (schedule.p0(t), schedule.p1(t));
    if !(p1 > p0) {
        return Err(Error::phase(format!(
            "growth split requires p1 > p0 (p0 = {p0}, p1 = {p1})"
        )));
    }
    let kind = domain.kind();
    let d = p1 - p0;
    let b1 = on_grid(domain, |p| {
        let f = coefficients.f.eval(t, p, kind);
        let g = coefficients.g.eval(t, p, kind);
        let scale = ((p1 * f.ln() - p0 * g.ln()) / d).exp();
        Ok(coefficients.b.eval(t, p, kind) - d / p1 * scale)
    })?;
    let g1_sup = domain
        .verification_grid()
        .into_iter()
        .map(|p| (1.0 + p0 / p1) * coefficients.g.eval(t, p, kind))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GrowthSplit {
        b1: EffectiveCoefficient::from_values(t, b1),
        g1_sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dissipativity {
    /// b1(t) >= 0
    StableCaseA,
    /// b1 negative somewhere but diffusion a0 lambda1 dominates it
    StableCaseB,
    Indeterminate,
}

pub fn dissipativity_check(effective: &EffectiveCoefficient, a0: f64, lambda1: f64) -> Dissipativity {
    if effective.inf >= 0.0 {
        Dissipativity::StableCaseA
    } else if a0 * lambda1 >= effective.inf.abs() {
        Dissipativity::StableCaseB
    } else {
        Dissipativity::Indeterminate
    }
}
