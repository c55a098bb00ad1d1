//! Finite-time blow-up: variable-exponent calculus, the blow-up criterion
//! and closed-form bounds on the blow-up time.

use serde::{Deserialize, Serialize};

use crate::energy::{self, EnergyParams, EnvelopeOptions};
use crate::error::{Error, Result};
use crate::model::{CoefficientSet, ExponentSchedule, Schedule, SpectralDomain};

/// d/dt y^{-q} = -y^{-q} [q' ln y + q y'/y].
pub fn variable_exponent_derivative(y: f64, dy: f64, q: f64, dq: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y^(-q) needs y > 0, got {y}")));
    }
    Ok(-y.powf(-q) * (dq * y.ln() + q * dy / y))
}

/// Constants of the bound (p1'/2p1) s^2 ln s^2 <= b1 s^2 + c s^{p1+2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBound {
    pub eps: f64,
    pub c: f64,
}

pub fn log_bound_constant(b1: f64, p1: f64, dp1: f64) -> Result<LogBound> {
    if !(p1 > 1.0) {
        return Err(Error::Domain(format!("log bound needs p1 > 1, got {p1}")));
    }
    if !(b1 > 0.0) || !(dp1 >= 0.0) {
        return Err(Error::Domain(format!(
            "log bound needs b1 > 0 and p1' >= 0, got b1 = {b1}, p1' = {dp1}"
        )));
    }
    if dp1 == 0.0 {
        return Ok(LogBound { eps: 0.0, c: 0.0 });
    }
    let eps = dp1 / (2.0 * p1) * (p1 / (p1 - 1.0) * b1).powf(-(p1 - 1.0) / p1);
    Ok(LogBound {
        eps,
        c: eps.powf(p1) / p1,
    })
}

/// Sign of ||a^{1/2} grad u||^2 - ||g^{1/2} u||^2 ||u||^{p1} at t1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub blows_up: bool,
    pub delta: f64,
}

pub fn blowup_criterion(
    coeffs: &[f64],
    t1: f64,
    domain: &SpectralDomain,
    fields: &CoefficientSet,
    exponents: &ExponentSchedule,
) -> Result<Criterion> {
    let p0 = exponents.p0(t1);
    if p0.abs() > crate::regimes::CRITICAL_TOLERANCE {
        return Err(Error::phase(format!("blow-up criterion needs p0(t1) = 0, got {p0}")));
    }
    if coeffs.len() != domain.mode_count() {
        return Err(Error::config("coefficient count does not match the basis"));
    }
    let kind = domain.kind();
    let rule = domain.default_rule();
    let dirichlet = rule.integrate(|p| {
        let (gx, gy) = domain.evaluate_grad(coeffs, p);
        fields.a.eval(t1, p, kind) * (gx * gx + gy * gy)
    });
    let weighted = rule.integrate(|p| {
        let u = domain.evaluate(coeffs, p);
        fields.g.eval(t1, p, kind) * u * u
    });
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let delta = dirichlet - weighted * norm.powf(exponents.p1(t1));
    Ok(Criterion {
        blows_up: delta < 0.0,
        delta,
    })
}

/// Solves P(t) = target for t >= t_from, with P increasing.
fn invert_increasing(p: &Schedule, t_from: f64, target: f64) -> Option<f64> {
    let f = |t: f64| p.antiderivative(t) - target;
    if f(t_from) >= 0.0 {
        return Some(t_from);
    }
    let mut span = 1.0;
    let mut hi = t_from + span;
    while f(hi) < 0.0 {
        span *= 2.0;
        if span > 1e12 {
            return None;
        }
        hi = t_from + span;
    }
    let mut lo = t_from;
    while hi - lo > 1e-6 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Newton polish, kept inside the bracket
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let slope = p.value(t);
        let next = if slope > 0.0 { t - f(t) / slope } else { f64::NAN };
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if f(next) < 0.0 {
            lo = next;
        } else {
            hi = next;
        }
        let done = (next - t).abs() <= 1e-10 * (1.0 + t.abs()) * 1e-3;
        t = next;
        if done || hi - lo <= f64::EPSILON * (1.0 + t.abs()) {
            break;
        }
    }
    Some(t)
}

/// Blow-up time of (1/2) y' = -c1 y + c2 y^{p1(t)/2+1} - (p1'/2p1) y ln y
/// from y(t1) = y1: P1(t) = P1(t1) - (1/c1) ln(1 - c1/(c2 y1^{p1(t1)/2})).
pub fn blowup_time(y1: f64, t1: f64, c1: f64, c2: f64, p1: &Schedule) -> Option<f64> {
    if !(y1 > 0.0 && c2 > 0.0) {
        return None;
    }
    let q = p1.value(t1);
    if !(q > 0.0) {
        return None;
    }
    let drive = c2 * y1.powf(0.5 * q);
    let rise = if c1 == 0.0 {
        y1.powf(-0.5 * q) / c2
    } else {
        let arg = 1.0 - c1 / drive;
        if !(arg > 0.0 && arg < 1.0) {
            return None;
        }
        -arg.ln() / c1
    };
    invert_increasing(p1, t1, p1.antiderivative(t1) + rise).filter(|t| t.is_finite())
}

/// Blow-up time from the constant set (a0 lambda1, G0).
pub fn blowup_time_upper(y1: f64, t1: f64, params: &EnergyParams) -> Option<f64> {
    blowup_time(y1, t1, params.a0 * params.lambda1, params.big_g0, &params.p1)
}

/// Blow-up time from the constant set (A0 lambda1 + B1, g0).
pub fn blowup_time_lower(y1: f64, t1: f64, params: &EnergyParams) -> Option<f64> {
    blowup_time(
        y1,
        t1,
        params.big_a0 * params.lambda1 + params.big_b1,
        params.g0,
        &params.p1,
    )
}

/// Bernoulli closed form for constant p1 = 2p:
/// t* = ln(c2 y1^p / (c2 y1^p - c1)) / (2 p c1).
pub fn bernoulli_blowup_time(y1: f64, c1: f64, c2: f64, p1: f64) -> Option<f64> {
    let p = 0.5 * p1;
    let drive = c2 * y1.powf(p);
    if !(drive > c1) {
        return None;
    }
    if c1 == 0.0 {
        return Some(1.0 / (p1 * drive));
    }
    Some((drive / (drive - c1)).ln() / (p1 * c1))
}

/// Singular time of the log-corrected envelope found by direct
/// integration, or None if it stays below the guard until t_end.
pub fn envelope_singular_time(
    y1: f64,
    t1: f64,
    t_end: f64,
    (c1, c2): (f64, f64),
    p1: &Schedule,
    opts: &EnvelopeOptions,
) -> Result<Option<f64>> {
    let f = |t: f64, y: f64| {
        let q = p1.value(t);
        let y = y.max(f64::MIN_POSITIVE);
        2.0 * (-c1 * y + c2 * y.powf(0.5 * q + 1.0) - p1.derivative(t) / (2.0 * q) * y * y.ln())
    };
    let tail = |t: f64, y: f64| energy::bernoulli_tail(y, c1, c2, p1.value(t));
    let run = energy::integrate_scalar_on(y1, &[t1, t_end], f, opts, Some(&tail))?;
    Ok(run.singular_time)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// Closed form through inversion of P1.
    ClosedForm,
    /// Singularity of the numerically integrated envelope.
    EnvelopeSingularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketStatus {
    Closed,
    HalfOpen,
    NoBlowupDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupBracket {
    pub t_lower: Option<f64>,
    pub t_upper: Option<f64>,
    pub lower_method: Option<BoundMethod>,
    pub upper_method: Option<BoundMethod>,
    pub status: BracketStatus,
    /// Criterion value at t1.
    pub delta: f64,
    pub log_correction: Option<LogBound>,
}

impl BlowupBracket {
    pub fn width(&self) -> Option<f64> {
        Some(self.t_upper? - self.t_lower?)
    }
}

/// Brackets the blow-up time from y(t1) = y1 using both closed forms,
/// falling back to envelope singularities within [t1, t1 + horizon].
pub fn blowup_bracket(
    y1: f64,
    t1: f64,
    delta: f64,
    params: &EnergyParams,
    horizon: f64,
    opts: &EnvelopeOptions,
) -> Result<BlowupBracket> {
    if !(y1 > 0.0) {
        return Err(Error::config(format!("bracket needs y1 > 0, got {y1}")));
    }
    let fast = blowup_time_upper(y1, t1, params);
    let slow = blowup_time_lower(y1, t1, params);
    let log_correction = log_bound_constant(params.b1, params.p1.value(t1), params.p1.derivative(t1)).ok();
    let mut found: Vec<(f64, BoundMethod)> = Vec::new();
    found.extend(fast.map(|t| (t, BoundMethod::ClosedForm)));
    found.extend(slow.map(|t| (t, BoundMethod::ClosedForm)));
    if found.len() < 2 && horizon > 0.0 {
        let env = energy::integrate_envelopes(y1, t1, t1 + horizon, params, opts)?;
        let numeric = if fast.is_none() {
            env.upper_singular_time
        } else {
            env.lower_singular_time
        };
        found.extend(numeric.map(|t| (t, BoundMethod::EnvelopeSingularity)));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let bracket = match found.as_slice() {
        [] => BlowupBracket {
            t_lower: None,
            t_upper: None,
            lower_method: None,
            upper_method: None,
            status: BracketStatus::NoBlowupDetected,
            delta,
            log_correction,
        },
        [(t, m)] => BlowupBracket {
            t_lower: Some(*t),
            t_upper: None,
            lower_method: Some(*m),
            upper_method: None,
            status: BracketStatus::HalfOpen,
            delta,
            log_correction,
        },
        [(lo, ml), .., (hi, mh)] => BlowupBracket {
            t_lower: Some(*lo),
            t_upper: Some(*hi),
            lower_method: Some(*ml),
            upper_method: Some(*mh),
            status: BracketStatus::Closed,
            delta,
            log_correction,
        },
    };
    Ok(bracket)
}
