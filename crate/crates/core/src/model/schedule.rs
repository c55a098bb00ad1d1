//! Exponent schedules p0(t), p1(t) from named parametric families with
//! closed-form derivatives and antiderivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// initial e^{-rate t}
    Relaxing {
        initial: f64,
        rate: f64,
    },
    /// offset + amplitude (1 - e^{-rate t})
    Saturating {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        rate: f64,
    },
    /// intercept + slope t
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// Linear interpolation between (t, value) knots, constant outside.
    PiecewiseLinear {
        knots: Vec<[f64; 2]>,
    },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    /// Checks the family parameters.
    pub fn check(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("schedule {what} must be finite")))
            }
        };
        match self {
            Schedule::Constant { value } => finite(*value, "value"),
            Schedule::Relaxing { initial, rate } => {
                finite(*initial, "initial")?;
                finite(*rate, "rate")
            }
            Schedule::Saturating {
                offset,
                amplitude,
                rate,
            } => {
                finite(*offset, "offset")?;
                finite(*amplitude, "amplitude")?;
                finite(*rate, "rate")
            }
            Schedule::Affine { intercept, slope } => {
                finite(*intercept, "intercept")?;
                finite(*slope, "slope")
            }
            Schedule::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err(Error::config("piecewise-linear schedule needs at least one knot"));
                }
                for k in knots {
                    finite(k[0], "knot time")?;
                    finite(k[1], "knot value")?;
                }
                if knots.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err(Error::config("piecewise-linear knot times must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant { value } => *value,
            Schedule::Relaxing { initial, rate } => initial * (-rate * t).exp(),
            Schedule::Saturating {
                offset,
                amplitude,
                rate,
            } => offset + amplitude * (1.0 - (-rate * t).exp()),
            Schedule::Affine { intercept, slope } => intercept + slope * t,
            Schedule::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first[0] {
                    return first[1];
                }
                if t >= last[0] {
                    return last[1];
                }
                let i = knots.partition_point(|k| k[0] <= t) - 1;
                let (a, b) = (knots[i], knots[i + 1]);
                a[1] + (b[1] - a[1]) * (t - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// Time derivative (right derivative at piecewise-linear knots).
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant { .. } => 0.0,
            Schedule::Relaxing { initial, rate } => -rate * initial * (-rate * t).exp(),
            Schedule::Saturating { amplitude, rate, .. } => amplitude * rate * (-rate * t).exp(),
            Schedule::Affine { slope, .. } => *slope,
            Schedule::PiecewiseLinear { knots } => {
                if t < knots[0][0] || t >= knots[knots.len() - 1][0] {
                    return 0.0;
                }
                let i = knots.partition_point(|k| k[0] <= t) - 1;
                let (a, b) = (knots[i], knots[i + 1]);
                (b[1] - a[1]) / (b[0] - a[0])
            }
        }
    }

    /// int_0^t value(s) ds.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant { value } => value * t,
            Schedule::Relaxing { initial, rate } => {
                if *rate == 0.0 {
                    initial * t
                } else {
                    initial * (-(-rate * t).exp_m1()) / rate
                }
            }
            Schedule::Saturating {
                offset,
                amplitude,
                rate,
            } => {
                if *rate == 0.0 {
                    offset * t
                } else {
                    offset * t + amplitude * (t + (-rate * t).exp_m1() / rate)
                }
            }
            Schedule::Affine { intercept, slope } => intercept * t + 0.5 * slope * t * t,
            Schedule::PiecewiseLinear { .. } => self.piecewise_integral(0.0, t),
        }
    }

    fn piecewise_integral(&self, lo: f64, hi: f64) -> f64 {
        let Schedule::PiecewiseLinear { knots } = self else {
            unreachable!()
        };
        if hi < lo {
            return -self.piecewise_integral(hi, lo);
        }
        // breakpoints inside (lo, hi)
        let mut cuts = vec![lo];
        cuts.extend(knots.iter().map(|k| k[0]).filter(|&s| s > lo && s < hi));
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]) + self.value(w[1])))
            .sum()
    }
}

/// Smallest t in [0, horizon] where a predicate that stays true once it
/// holds becomes true, by grid scan plus bisection.
fn first_time(horizon: f64, pred: impl Fn(f64) -> bool) -> Option<f64> {
    if pred(0.0) {
        return Some(0.0);
    }
    let n = 4096;
    let mut prev = 0.0;
    for i in 1..=n {
        let t = horizon * i as f64 / n as f64;
        if pred(t) {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if pred(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-14 * hi.max(1.0) {
                    break;
                }
            }
            return Some(hi);
        }
        prev = t;
    }
    None
}

/// Number of samples used when checking monotonicity.
pub const MONOTONE_SAMPLES: usize = 1000;

/// The pair p0 (damping exponent), p1 (growth exponent) with the total
/// quantity p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSchedule {
    pub p: f64,
    pub p0: Schedule,
    pub p1: Schedule,
}

/// Switch times of an exponent schedule within a search horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchTimes {
    /// First time p1 > p0.
    pub t0: Option<f64>,
    /// First time p0 vanishes.
    pub t1: Option<f64>,
}

impl ExponentSchedule {
    pub fn new(p: f64, p0: Schedule, p1: Schedule) -> Self {
        Self { p, p0, p1 }
    }

    pub fn p0(&self, t: f64) -> f64 {
        self.p0.value(t)
    }

    pub fn p1(&self, t: f64) -> f64 {
        self.p1.value(t)
    }

    /// Validates the structural conditions on [0, horizon]: p > 0,
    /// p0(0) = p - 1, p0 >= 0 nonincreasing, p1 >= 0 nondecreasing and
    /// p1 <= p - 1.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        self.p0.check()?;
        self.p1.check()?;
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::config(format!(
                "total exponent p must be positive, got {}",
                self.p
            )));
        }
        let start = self.p0(0.0);
        if (start - (self.p - 1.0)).abs() > 1e-12 * self.p.max(1.0) {
            return Err(Error::config(format!(
                "p0(0) must equal p - 1 = {}, got {start}",
                self.p - 1.0
            )));
        }
        let cap = self.p - 1.0 + 1e-12 * self.p.max(1.0);
        let mut prev0 = start;
        let mut prev1 = self.p1(0.0);
        for i in 0..=MONOTONE_SAMPLES {
            let t = horizon * i as f64 / MONOTONE_SAMPLES as f64;
            let (v0, v1) = (self.p0(t), self.p1(t));
            if v0 < 0.0 || v1 < 0.0 {
                return Err(Error::config(format!("exponents must be nonnegative (t = {t})")));
            }
            if v0 > prev0 + 1e-12 {
                return Err(Error::config(format!("p0 must be nonincreasing (t = {t})")));
            }
            if v1 < prev1 - 1e-12 {
                return Err(Error::config(format!("p1 must be nondecreasing (t = {t})")));
            }
            if v1 > cap {
                return Err(Error::config(format!("p1 must not exceed p - 1 (t = {t}, p1 = {v1})")));
            }
            prev0 = v0;
            prev1 = v1;
        }
        Ok(())
    }

    /// Switch times searched on [0, horizon].
    pub fn switch_times(&self, horizon: f64) -> SwitchTimes {
        let t0 = first_time(horizon, |t| self.p1(t) > self.p0(t));
        let t1 = first_time(horizon, |t| self.p0(t) <= 0.0);
        SwitchTimes { t0, t1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn families() -> Vec<Schedule> {
        vec![
            Schedule::Constant { value: 1.5 },
            Schedule::Relaxing {
                initial: 2.0,
                rate: 0.7,
            },
            Schedule::Saturating {
                offset: 0.2,
                amplitude: 1.3,
                rate: 2.0,
            },
            Schedule::Affine {
                intercept: 2.0,
                slope: 1.0,
            },
            Schedule::PiecewiseLinear {
                knots: vec![[0.5, 2.0], [1.0, 0.5], [3.0, 0.0]],
            },
        ]
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        for s in families() {
            for t in [0.0f64, 0.3, 0.75, 1.0, 2.2, 5.0] {
                let q = crate::quadrature::CompositeRule::new(0.0, t.max(1e-300), 64, 16);
                // piecewise schedules: split at the kinks for an exact rule
                let exact = match &s {
                    Schedule::PiecewiseLinear { knots } => {
                        let mut cuts = vec![0.0];
                        cuts.extend(knots.iter().map(|k| k[0]).filter(|&c| c > 0.0 && c < t));
                        cuts.push(t);
                        cuts.windows(2)
                            .map(|w| crate::quadrature::integrate(w[0], w[1], |x| s.value(x)))
                            .sum::<f64>()
                    }
                    _ => q.integrate(|x| s.value(x)),
                };
                let a = s.antiderivative(t);
                assert!(
                    (a - exact).abs() < 1e-12 * (1.0 + exact.abs()),
                    "{s:?} t={t}: {a} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for s in families() {
            for t in [0.1, 0.7, 1.6, 4.0] {
                let h = 1e-6;
                let fd = (s.value(t + h) - s.value(t - h)) / (2.0 * h);
                assert!((s.derivative(t) - fd).abs() < 1e-6, "{s:?} t={t}");
            }
        }
    }

    #[test]
    fn switch_times_of_relaxing_and_saturating_pair() {
        // p0 = 2e^{-t}, p1 = 1 - e^{-t}: equal at t = ln 3, p0 never zero.
        let e = ExponentSchedule::new(
            3.0,
            Schedule::Relaxing {
                initial: 2.0,
                rate: 1.0,
            },
            Schedule::Saturating {
                offset: 0.0,
                amplitude: 1.0,
                rate: 1.0,
            },
        );
        e.validate(20.0).unwrap();
        let s = e.switch_times(20.0);
        assert!((s.t0.unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!(s.t1.is_none());
    }

    #[test]
    fn switch_time_t1_for_ramp() {
        let e = ExponentSchedule::new(
            3.0,
            Schedule::PiecewiseLinear {
                knots: vec![[0.0, 2.0], [2.0, 0.0]],
            },
            Schedule::Saturating {
                offset: 0.0,
                amplitude: 2.0,
                rate: 1.0,
            },
        );
        e.validate(10.0).unwrap();
        let s = e.switch_times(10.0);
        assert!((s.t1.unwrap() - 2.0).abs() < 1e-12);
        assert!(s.t0.unwrap() < s.t1.unwrap());
    }

    #[test]
    fn structural_violations_are_rejected() {
        let bad_start = ExponentSchedule::new(3.0, Schedule::constant(1.0), Schedule::constant(0.5));
        assert!(bad_start.validate(1.0).is_err());
        let increasing_p0 = ExponentSchedule::new(
            3.0,
            Schedule::Affine {
                intercept: 2.0,
                slope: 0.1,
            },
            Schedule::constant(0.5),
        );
        assert!(increasing_p0.validate(1.0).is_err());
        let p1_too_big = ExponentSchedule::new(
            3.0,
            Schedule::constant(2.0),
            Schedule::Affine {
                intercept: 1.0,
                slope: 1.0,
            },
        );
        assert!(p1_too_big.validate(5.0).is_err());
        let unsorted = Schedule::PiecewiseLinear {
            knots: vec![[1.0, 1.0], [0.5, 0.0]],
        };
        assert!(unsorted.check().is_err());
    }

    proptest! {
        #[test]
        fn built_in_families_respect_monotonicity(
            p in 1.5f64..6.0,
            alpha in 0.01f64..5.0,
            frac in 0.0f64..1.0,
            gamma in 0.01f64..5.0,
            horizon in 0.5f64..50.0,
        ) {
            let e = ExponentSchedule::new(
                p,
                Schedule::Relaxing { initial: p - 1.0, rate: alpha },
                Schedule::Saturating { offset: 0.0, amplitude: frac * (p - 1.0), rate: gamma },
            );
            prop_assert!(e.validate(horizon).is_ok());
            for i in 0..MONOTONE_SAMPLES {
                let t0 = horizon * i as f64 / MONOTONE_SAMPLES as f64;
                let t1 = horizon * (i + 1) as f64 / MONOTONE_SAMPLES as f64;
                prop_assert!(e.p0(t1) <= e.p0(t0));
                prop_assert!(e.p1(t1) >= e.p1(t0));
            }
        }
    }
}
