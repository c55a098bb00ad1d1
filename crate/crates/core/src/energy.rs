//! Scalar comparison problems for y(t) = ||u(t)||^2.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoefficientBounds, Schedule};
use crate::ode::{Dopri5, Guard, Outcome, Tolerance};
use crate::quadrature;

/// Constants of the two-sided comparison problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub a0: f64,
    pub big_a0: f64,
    /// b0 + f0
    pub b1: f64,
    /// B0 + F0
    pub big_b1: f64,
    pub g0: f64,
    pub big_g0: f64,
    pub lambda1: f64,
    /// Upper Rayleigh bound ||grad u||^2 <= lambda_top ||u||^2 used by the
    /// lower envelope; equals lambda1 for first-mode data.
    pub lambda_top: f64,
    pub p1: Schedule,
}

impl EnergyParams {
    pub fn new(
        (a0, big_a0): (f64, f64),
        (b1, big_b1): (f64, f64),
        (g0, big_g0): (f64, f64),
        lambda1: f64,
        p1: Schedule,
    ) -> Result<Self> {
        let p = Self {
            a0,
            big_a0,
            b1,
            big_b1,
            g0,
            big_g0,
            lambda1,
            lambda_top: lambda1,
            p1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_bounds(bounds: &CoefficientBounds, lambda1: f64, p1: Schedule) -> Result<Self> {
        Self::new(
            (bounds.a.lower, bounds.a.upper),
            (bounds.b.lower + bounds.f.lower, bounds.b.upper + bounds.f.upper),
            (bounds.g.lower, bounds.g.upper),
            lambda1,
            p1,
        )
    }

    pub fn with_lambda_top(mut self, lambda_top: f64) -> Result<Self> {
        self.lambda_top = lambda_top;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            self.a0,
            self.big_a0,
            self.g0,
            self.big_g0,
            self.lambda1,
            self.lambda_top,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::config("a0, A0, g0, G0 and lambda1 must be positive"));
        }
        if !(self.b1 >= 0.0 && self.big_b1 >= 0.0 && self.big_b1.is_finite()) {
            return Err(Error::config("b1 and B1 must be nonnegative"));
        }
        if self.a0 > self.big_a0 || self.b1 > self.big_b1 || self.g0 > self.big_g0 {
            return Err(Error::config("lower constants must not exceed upper constants"));
        }
        if self.lambda_top < self.lambda1 {
            return Err(Error::config("lambda_top must be at least lambda1"));
        }
        self.p1.check()
    }

    /// P1(t) = int_0^t p1.
    pub fn p1_integral(&self, t: f64) -> f64 {
        self.p1.antiderivative(t)
    }

    /// Damping and growth constants (c1, c2) of the lower envelope.
    pub fn lower_constants(&self) -> (f64, f64) {
        (self.big_a0 * self.lambda_top + self.big_b1, self.g0)
    }

    /// Damping and growth constants (c1, c2) of the upper envelope.
    pub fn upper_constants(&self) -> (f64, f64) {
        (self.a0 * self.lambda1 + self.b1, self.big_g0)
    }
}

/// Inputs of the semi-flow decay factor.
pub struct SemiflowData<'a> {
    pub a0_lambda1: f64,
    pub t0: f64,
    pub r0: f64,
    pub b10: &'a dyn Fn(f64) -> f64,
    pub b1: &'a dyn Fn(f64) -> f64,
    pub g10: &'a dyn Fn(f64) -> f64,
    pub p1: &'a Schedule,
}

/// ||u(t1)||^2 = exp{-[a0 l1 t1 + int_0^t0 b10 + int_t0^t1 (b1 - g10 r0^p1)]} ||u0||^2
pub fn semiflow_norm(t1: f64, u0_norm_sq: f64, data: &SemiflowData<'_>) -> Result<f64> {
    if !(data.t0 >= 0.0 && t1 >= data.t0) {
        return Err(Error::config(format!(
            "semi-flow needs t1 >= t0 >= 0 (t0 = {}, t1 = {t1})",
            data.t0
        )));
    }
    if u0_norm_sq == 0.0 {
        return Ok(0.0);
    }
    let early = quadrature::integrate(0.0, data.t0, |s| (data.b10)(s));
    let late = quadrature::integrate(data.t0, t1, |s| {
        (data.b1)(s) - (data.g10)(s) * data.r0.powf(data.p1.value(s))
    });
    Ok((-(data.a0_lambda1 * t1 + early + late)).exp() * u0_norm_sq)
}

/// Constants of the self-consistent decay bound.
pub struct DecayParams<'a> {
    /// a0 lambda1 + b1
    pub damping: f64,
    pub g10: f64,
    pub p1: &'a Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecayMethod {
    FixedPoint,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecayOutcome {
    /// Bound on r(t)^2.
    Bound {
        value: f64,
        method: DecayMethod,
        iterations: usize,
    },
    /// Neither the fixed point nor the ODE route produced a finite bound.
    Diverged { iterations: usize },
}

impl DecayOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            DecayOutcome::Bound { value, .. } => Some(*value),
            DecayOutcome::Diverged { .. } => None,
        }
    }
}

const DECAY_NODES: usize = 4097;
const DECAY_MAX_ITER: usize = 100;
const DECAY_DAMPING: f64 = 0.5;

/// r(t)^2 <= exp{-2 damping t + 2 g10 int_0^t r^p1} r0^2, resolved by
/// damped fixed-point iteration on a uniform grid with an ODE fallback.
pub fn decay_envelope(t: f64, r0: f64, params: &DecayParams<'_>) -> Result<DecayOutcome> {
    if !(t >= 0.0) {
        return Err(Error::config(format!("decay envelope needs t >= 0, got {t}")));
    }
    let y0 = r0 * r0;
    if t == 0.0 || y0 == 0.0 {
        return Ok(DecayOutcome::Bound {
            value: y0,
            method: DecayMethod::FixedPoint,
            iterations: 0,
        });
    }
    let k = params.damping;
    let h = t / (DECAY_NODES - 1) as f64;
    let times: Vec<f64> = (0..DECAY_NODES).map(|i| i as f64 * h).collect();
    let p1: Vec<f64> = times.iter().map(|&s| params.p1.value(s)).collect();
    let mut y: Vec<f64> = times.iter().map(|&s| y0 * (-2.0 * k * s).exp()).collect();
    let mut next = vec![0.0; DECAY_NODES];
    for iter in 1..=DECAY_MAX_ITER {
        let mut integral = 0.0;
        let mut prev = y[0].max(0.0).powf(0.5 * p1[0]);
        next[0] = y0;
        let mut change = 0.0f64;
        let mut finite = true;
        for i in 1..DECAY_NODES {
            let cur = y[i].max(0.0).powf(0.5 * p1[i]);
            integral += 0.5 * h * (prev + cur);
            prev = cur;
            let phi = y0 * (-2.0 * k * times[i] + 2.0 * params.g10 * integral).exp();
            let v = DECAY_DAMPING * y[i] + (1.0 - DECAY_DAMPING) * phi;
            if !v.is_finite() {
                finite = false;
                break;
            }
            change = change.max((v - y[i]).abs() / v.abs().max(f64::MIN_POSITIVE));
            next[i] = v;
        }
        if !finite {
            break;
        }
        std::mem::swap(&mut y, &mut next);
        if change < 1e-13 {
            return Ok(DecayOutcome::Bound {
                value: y[DECAY_NODES - 1],
                method: DecayMethod::FixedPoint,
                iterations: iter,
            });
        }
    }
    // y' = -2 k y + 2 g10 y^{p1/2 + 1}
    let run = integrate_scalar(
        y0,
        0.0,
        t,
        |s, y| -2.0 * k * y + 2.0 * params.g10 * y.max(0.0).powf(0.5 * params.p1.value(s) + 1.0),
        1e12,
    )?;
    Ok(match run.singular_time {
        None => DecayOutcome::Bound {
            value: run.end_value,
            method: DecayMethod::Ode,
            iterations: DECAY_MAX_ITER,
        },
        Some(_) => DecayOutcome::Diverged {
            iterations: DECAY_MAX_ITER,
        },
    })
}

/// Inputs of the small-data solvability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    pub a0_lambda1: f64,
    /// sup of b1(t) over (0, t0)
    pub b1_bar: f64,
    /// b10(t0) = inf_x |b1(t0, x)|
    pub b10: f64,
    /// sup_x g1
    pub g10: f64,
    /// p1(t0)
    pub p1_t0: f64,
}

/// g10 (e^{-(a0 l1 + b1_bar) t0} r0)^{p1(t0)} < a0 l1 + b10(t0).
pub fn solvability_threshold(r0: f64, t0: f64, params: &ThresholdParams) -> bool {
    let decayed = (-(params.a0_lambda1 + params.b1_bar) * t0).exp() * r0;
    params.g10 * decayed.powf(params.p1_t0) < params.a0_lambda1 + params.b10
}

/// Envelope integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Output spacing.
    pub cadence: f64,
    /// Blow-up guard on y.
    pub guard: f64,
    pub rtol: f64,
    /// Absolute tolerance on located singular times.
    pub time_tol: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            cadence: 0.01,
            guard: 1e12,
            rtol: 1e-9,
            time_tol: 1e-10,
        }
    }
}

/// Both comparison envelopes on a common time grid. Values after a
/// singular time are +inf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeTrajectory {
    pub times: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower_singular_time: Option<f64>,
    pub upper_singular_time: Option<f64>,
    /// c of the log-bound correction folded into the upper growth
    /// constant, at the start time.
    pub log_correction: f64,
}

impl EnvelopeTrajectory {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "y_low", "y_up", "low_blowup", "up_blowup"])?;
        for (i, t) in self.times.iter().enumerate() {
            let lb = self.lower_singular_time.is_some_and(|s| *t >= s);
            let ub = self.upper_singular_time.is_some_and(|s| *t >= s);
            out.write_record([
                crate::io::fmt_f64(*t),
                crate::io::fmt_f64(self.lower[i]),
                crate::io::fmt_f64(self.upper[i]),
                (lb as u8).to_string(),
                (ub as u8).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// First grid time where either envelope is singular.
    pub fn first_singularity(&self) -> Option<f64> {
        match (self.lower_singular_time, self.upper_singular_time) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Result of a single guarded scalar integration.
#[derive(Debug, Clone)]
pub struct ScalarRun {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub end_value: f64,
    pub singular_time: Option<f64>,
}

fn integrate_scalar(y0: f64, t0: f64, t_end: f64, f: impl Fn(f64, f64) -> f64, guard: f64) -> Result<ScalarRun> {
    let grid = [t0, t_end];
    integrate_scalar_on(
        y0,
        &grid,
        f,
        &EnvelopeOptions {
            guard,
            ..EnvelopeOptions::default()
        },
        None,
    )
}

/// Integrates y' = f(t, y) through the grid with the blow-up guard. On a
/// guard trip the singular time is the crossing time plus `tail(t, y)`.
pub(crate) fn integrate_scalar_on(
    y0: f64,
    grid: &[f64],
    f: impl Fn(f64, f64) -> f64,
    opts: &EnvelopeOptions,
    tail: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<ScalarRun> {
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = f(t, y[0]);
    let mut ode = Dopri5::new(
        grid[0],
        vec![y0],
        Tolerance {
            rtol: opts.rtol,
            atol: 1e-300_f64.max(1e-14 * y0.abs().min(1.0)),
        },
    );
    let measure = |y: &[f64]| y[0];
    let guard = Guard {
        measure: &measure,
        threshold: opts.guard,
        time_tol: opts.time_tol,
    };
    let mut times = vec![grid[0]];
    let mut values = vec![y0];
    for &t in &grid[1..] {
        match ode.advance(&mut rhs, t, Some(&guard))? {
            Outcome::Reached => {
                times.push(t);
                values.push(ode.y()[0]);
            }
            Outcome::GuardTripped => {
                let (tg, yg) = (ode.t(), ode.y()[0]);
                let extra = tail.map_or(0.0, |tail| tail(tg, yg));
                let ts = tg + extra;
                let last = times[times.len() - 1];
                for &rest in grid.iter().filter(|&&s| s > last) {
                    times.push(rest);
                    values.push(if rest >= ts { f64::INFINITY } else { f64::NAN });
                }
                return Ok(ScalarRun {
                    times,
                    values,
                    end_value: f64::INFINITY,
                    singular_time: Some(ts),
                });
            }
        }
    }
    let end_value = *values.last().unwrap();
    Ok(ScalarRun {
        times,
        values,
        end_value,
        singular_time: None,
    })
}

/// Remaining time to blow-up of (1/2) y' = -c1 y + c2 y^{q/2+1} from y,
/// with constant coefficients.
pub fn bernoulli_tail(y: f64, c1: f64, c2: f64, q: f64) -> f64 {
    if !(q > 0.0 && c2 > 0.0 && y > 0.0) {
        return 0.0;
    }
    let p = 0.5 * q;
    let z = y.powf(-p);
    if c1.abs() < 1e-300 {
        return z / (q * c2);
    }
    let ratio = c2 / (c2 - c1 * z);
    if !(ratio > 0.0) {
        return 0.0;
    }
    ratio.ln() / (q * c1)
}

/// Integrates (1/2) y' = -c1 y + c2(t) y^{p1(t)/2+1} from (t_start, y_start).
pub fn integrate_envelope(
    y_start: f64,
    grid: &[f64],
    c1: f64,
    c2: &dyn Fn(f64) -> f64,
    p1: &Schedule,
    opts: &EnvelopeOptions,
) -> Result<ScalarRun> {
    let f = |t: f64, y: f64| 2.0 * (-c1 * y + c2(t) * y.max(0.0).powf(0.5 * p1.value(t) + 1.0));
    let tail = |t: f64, y: f64| bernoulli_tail(y, c1, c2(t), p1.value(t));
    integrate_scalar_on(y_start, grid, f, opts, Some(&tail))
}

/// Log-bound correction c(t) added to the upper growth constant, zero
/// where the estimate does not apply (p1 <= 1 or b1 = 0).
pub fn log_correction(params: &EnergyParams, t: f64) -> f64 {
    let (p1, dp1) = (params.p1.value(t), params.p1.derivative(t));
    crate::blowup::log_bound_constant(params.b1, p1, dp1).map_or(0.0, |lb| lb.c)
}

/// Integrates the lower envelope (A0 lambda_top + B1, g0) and the upper
/// envelope (a0 lambda1 + b1, G0 + c) from y(t_start) to t_end.
pub fn integrate_envelopes(
    y_start: f64,
    t_start: f64,
    t_end: f64,
    params: &EnergyParams,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeTrajectory> {
    if !(y_start > 0.0 && y_start.is_finite()) {
        return Err(Error::config(format!(
            "envelope start value must be positive, got {y_start}"
        )));
    }
    if !(t_end > t_start) || !(opts.cadence > 0.0) {
        return Err(Error::config("envelope window must be nonempty with positive cadence"));
    }
    let steps = ((t_end - t_start) / opts.cadence).round().max(1.0) as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| {
            if i == steps {
                t_end
            } else {
                t_start + i as f64 * opts.cadence
            }
        })
        .collect();
    let (lc1, lc2) = params.lower_constants();
    let (uc1, uc2) = params.upper_constants();
    let lower = integrate_envelope(y_start, &grid, lc1, &|_| lc2, &params.p1, opts)?;
    let upper_growth = |t: f64| uc2 + log_correction(params, t);
    let upper = integrate_envelope(y_start, &grid, uc1, &upper_growth, &params.p1, opts)?;
    Ok(EnvelopeTrajectory {
        times: grid,
        lower: lower.values,
        upper: upper.values,
        lower_singular_time: lower.singular_time,
        upper_singular_time: upper.singular_time,
        log_correction: log_correction(params, t_start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_params(p1: Schedule) -> EnergyParams {
        EnergyParams::new((1.0, 1.0), (0.0, 0.0), (1.0, 1.0), 1.0, p1).unwrap()
    }

    #[test]
    fn semiflow_examples() {
        let one = |_: f64| 1.0;
        let p1 = Schedule::constant(1.0);
        let data = SemiflowData {
            a0_lambda1: 1.0,
            t0: 0.5,
            r0: 1.0,
            b10: &one,
            b1: &one,
            g10: &one,
            p1: &p1,
        };
        assert_relative_eq!(
            semiflow_norm(1.0, 1.0, &data).unwrap(),
            (-1.5f64).exp(),
            max_relative = 1e-14
        );
        assert_eq!(semiflow_norm(1.0, 0.0, &data).unwrap(), 0.0);
        // homogeneous in ||u0||^2
        let s1 = semiflow_norm(1.0, 1.0, &data).unwrap();
        assert_relative_eq!(semiflow_norm(1.0, 3.5, &data).unwrap(), 3.5 * s1, max_relative = 1e-14);
        let zero = |_: f64| 0.0;
        let pure = SemiflowData {
            a0_lambda1: 2.0,
            t0: 0.7,
            r0: 1.0,
            b10: &zero,
            b1: &zero,
            g10: &zero,
            p1: &p1,
        };
        assert_relative_eq!(
            semiflow_norm(0.7, 1.0, &pure).unwrap(),
            (-1.4f64).exp(),
            max_relative = 1e-14
        );
        assert!(semiflow_norm(0.2, 1.0, &data).is_err());
    }

    #[test]
    fn decay_envelope_linear_and_initial() {
        let p1 = Schedule::constant(1.0);
        let lin = DecayParams {
            damping: 1.0,
            g10: 0.0,
            p1: &p1,
        };
        let v = decay_envelope(1.0, 1.0, &lin).unwrap().value().unwrap();
        assert_relative_eq!(v, (-2.0f64).exp(), max_relative = 1e-14);
        let non = DecayParams {
            damping: 1.0,
            g10: 0.1,
            p1: &p1,
        };
        assert_eq!(decay_envelope(0.0, 0.8, &non).unwrap().value().unwrap(), 0.8 * 0.8);
    }

    #[test]
    fn decay_envelope_is_monotone_in_r0() {
        let p1 = Schedule::constant(1.5);
        let params = DecayParams {
            damping: 1.0,
            g10: 0.3,
            p1: &p1,
        };
        let mut prev = 0.0;
        for r0 in [0.1, 0.3, 0.6, 1.0, 1.5] {
            let v = decay_envelope(1.0, r0, &params).unwrap().value().unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn decay_envelope_diverges_for_large_data() {
        let p1 = Schedule::constant(2.0);
        let params = DecayParams {
            damping: 1.0,
            g10: 1.0,
            p1: &p1,
        };
        // y' = -2y + 2y^2 from y0 = 4 blows up at 1/2 ln(4/3) < 1
        let out = decay_envelope(1.0, 2.0, &params).unwrap();
        assert!(matches!(out, DecayOutcome::Diverged { .. }), "{out:?}");
    }

    #[test]
    fn solvability_threshold_examples() {
        let base = ThresholdParams {
            a0_lambda1: 1.0,
            b1_bar: 0.0,
            b10: 0.0,
            g10: 1.0,
            p1_t0: 1.0,
        };
        assert!(solvability_threshold(0.5, 0.0, &base));
        assert!(!solvability_threshold(
            2.0,
            0.0,
            &ThresholdParams { p1_t0: 2.0, ..base }
        ));
        assert!(solvability_threshold(
            1e-9,
            0.0,
            &ThresholdParams {
                p1_t0: 2.0,
                g10: 1e6,
                ..base
            }
        ));
    }

    #[test]
    fn envelope_blowup_matches_bernoulli() {
        // (1/2) y' = -y + y^2, y(0) = 2: t* = 1/2 ln 2
        let params = unit_params(Schedule::constant(2.0));
        let env = integrate_envelopes(2.0, 0.0, 1.0, &params, &EnvelopeOptions::default()).unwrap();
        let t_star = 0.5 * 2f64.ln();
        for s in [env.lower_singular_time.unwrap(), env.upper_singular_time.unwrap()] {
            assert!((s - t_star).abs() < 0.005 * t_star);
            assert!((s - t_star).abs() < 1e-8, "{s} vs {t_star}");
        }
        assert!(env.upper.last().unwrap().is_infinite());
    }

    #[test]
    fn envelope_linear_decay_when_growth_vanishes() {
        let z = Schedule::constant(2.0);
        let mut params = EnergyParams::new((1.0, 1.0), (0.5, 0.5), (1.0, 1.0), 1.0, z).unwrap();
        params.g0 = 1e-300;
        params.big_g0 = 1e-300;
        let env = integrate_envelopes(0.7, 0.0, 3.0, &params, &EnvelopeOptions::default()).unwrap();
        for (t, y) in env.times.iter().zip(&env.upper) {
            assert_relative_eq!(*y, 0.7 * (-3.0 * t).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn envelope_equilibrium_is_preserved() {
        // c_g y^{p1/2} = c_a l1 + c_b: y = 1 for the unit constants
        let params = unit_params(Schedule::constant(2.0));
        let env = integrate_envelopes(1.0, 0.0, 10.0, &params, &EnvelopeOptions::default()).unwrap();
        let drift = env
            .upper
            .iter()
            .chain(&env.lower)
            .map(|y| (y - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn envelopes_are_ordered() {
        let params = EnergyParams::new((0.8, 1.2), (0.3, 0.6), (0.5, 0.9), 1.0, Schedule::constant(1.5)).unwrap();
        let env = integrate_envelopes(0.9, 0.0, 5.0, &params, &EnvelopeOptions::default()).unwrap();
        for (l, u) in env.lower.iter().zip(&env.upper) {
            assert!(l <= u);
        }
    }

    #[test]
    fn envelope_csv_has_flags() {
        let params = unit_params(Schedule::constant(2.0));
        let env = integrate_envelopes(
            2.0,
            0.0,
            0.5,
            &params,
            &EnvelopeOptions {
                cadence: 0.1,
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        env.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,y_low,y_up,low_blowup,up_blowup\n"));
        assert!(text.lines().last().unwrap().ends_with(",1,1"));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(EnergyParams::new((0.0, 1.0), (0.0, 0.0), (1.0, 1.0), 1.0, Schedule::constant(1.0)).is_err());
        assert!(EnergyParams::new((2.0, 1.0), (0.0, 0.0), (1.0, 1.0), 1.0, Schedule::constant(1.0)).is_err());
        let p = unit_params(Schedule::constant(1.0));
        assert!(p.with_lambda_top(0.5).is_err());
    }
}
