//! Explicit Runge-Kutta integrators.
//!
//! [`Dopri5`] is an embedded Dormand-Prince 5(4) pair with step-size
//! control and a monotone guard: when a scalar measure of the state
//! exceeds a threshold inside an accepted step, the crossing time is
//! located by bisection on the step size.

// Stage combinations index several arrays at once.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Error-control settings.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-14,
        }
    }
}

/// Threshold on a scalar measure of the state.
pub struct Guard<'a> {
    pub measure: &'a dyn Fn(&[f64]) -> f64,
    pub threshold: f64,
    /// Absolute tolerance on the located crossing time.
    pub time_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Reached the requested time.
    Reached,
    /// The guard tripped; the integrator state sits at the crossing.
    GuardTripped,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// Adaptive Dormand-Prince 5(4) integrator holding its own state.
pub struct Dopri5 {
    pub tol: Tolerance,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: u64,
    t: f64,
    y: Vec<f64>,
    h: f64,
    stats: Stats,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    y_new: Vec<f64>,
    fsal_valid: bool,
}

impl Dopri5 {
    pub fn new(t0: f64, y0: Vec<f64>, tol: Tolerance) -> Self {
        let n = y0.len();
        Self {
            tol,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
            t: t0,
            h: 0.0,
            stats: Stats::default(),
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
            y_new: vec![0.0; n],
            y: y0,
            fsal_valid: false,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Replaces the state, e.g. after a renormalization.
    pub fn reset_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
        self.fsal_valid = false;
    }

    fn initial_step<F>(&mut self, rhs: &mut F, span: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        // Hairer-Norsett-Wanner starting step heuristic.
        let n = self.y.len();
        rhs(self.t, &self.y, &mut self.k[0]);
        self.stats.evaluations += 1;
        let scale = |y: f64| self.tol.atol + self.tol.rtol * y.abs();
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for i in 0..n {
            let s = scale(self.y[i]);
            d0 = d0.max((self.y[i] / s).abs());
            d1 = d1.max((self.k[0][i] / s).abs());
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        for i in 0..n {
            self.stage[i] = self.y[i] + h0 * self.k[0][i];
        }
        rhs(self.t + h0, &self.stage, &mut self.k[1]);
        self.stats.evaluations += 1;
        let mut d2 = 0.0f64;
        for i in 0..n {
            d2 = d2.max(((self.k[1][i] - self.k[0][i]) / scale(self.y[i])).abs() / h0);
        }
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        self.fsal_valid = true;
        (100.0 * h0).min(h1).min(span.abs()).min(self.h_max)
    }

    /// One trial step of size `h` from the current state into `y_new`;
    /// returns the scaled error norm. Requires `k[0]` to hold f(t, y).
    fn trial<F>(&mut self, rhs: &mut F, h: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = self.y.len();
        let t = self.t;
        let (k0, rest) = self.k.split_at_mut(1);
        let k1 = &mut rest[0];
        for i in 0..n {
            self.stage[i] = self.y[i] + h * A21 * k0[0][i];
        }
        rhs(t + C2 * h, &self.stage, k1);
        let (k01, rest) = self.k.split_at_mut(2);
        let k2 = &mut rest[0];
        for i in 0..n {
            self.stage[i] = self.y[i] + h * (A31 * k01[0][i] + A32 * k01[1][i]);
        }
        rhs(t + C3 * h, &self.stage, k2);
        let (kk, rest) = self.k.split_at_mut(3);
        let k3 = &mut rest[0];
        for i in 0..n {
            self.stage[i] = self.y[i] + h * (A41 * kk[0][i] + A42 * kk[1][i] + A43 * kk[2][i]);
        }
        rhs(t + C4 * h, &self.stage, k3);
        let (kk, rest) = self.k.split_at_mut(4);
        let k4 = &mut rest[0];
        for i in 0..n {
            self.stage[i] = self.y[i] + h * (A51 * kk[0][i] + A52 * kk[1][i] + A53 * kk[2][i] + A54 * kk[3][i]);
        }
        rhs(t + C5 * h, &self.stage, k4);
        let (kk, rest) = self.k.split_at_mut(5);
        let k5 = &mut rest[0];
        for i in 0..n {
            self.stage[i] =
                self.y[i] + h * (A61 * kk[0][i] + A62 * kk[1][i] + A63 * kk[2][i] + A64 * kk[3][i] + A65 * kk[4][i]);
        }
        rhs(t + h, &self.stage, k5);
        let k = &self.k;
        for i in 0..n {
            self.y_new[i] =
                self.y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        rhs(t + h, &self.y_new, &mut self.k[6]);
        self.stats.evaluations += 6;

        let k = &self.k;
        let mut err = 0.0f64;
        for i in 0..n {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = self.tol.atol + self.tol.rtol * self.y[i].abs().max(self.y_new[i].abs());
            let r = (e / sc).abs();
            if !r.is_finite() || !self.y_new[i].is_finite() {
                return f64::INFINITY;
            }
            err = err.max(r);
        }
        err
    }

    fn ensure_derivative<F>(&mut self, rhs: &mut F)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if !self.fsal_valid {
            rhs(self.t, &self.y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal_valid = true;
        }
    }

    /// Integrates up to `t_end`, stopping early if `guard` trips.
    pub fn advance<F>(&mut self, rhs: &mut F, t_end: f64, guard: Option<&Guard<'_>>) -> Result<Outcome>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if t_end <= self.t {
            return Ok(Outcome::Reached);
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(rhs, t_end - self.t);
        }
        self.ensure_derivative(rhs);
        let mut steps = 0u64;
        while self.t < t_end {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Integrator {
                    t: self.t,
                    reason: format!("exceeded {} steps", self.max_steps),
                });
            }
            let remaining = t_end - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h.min(self.h_max) };
            let err = self.trial(rhs, h);
            if err <= 1.0 {
                if let Some(g) = guard {
                    if (g.measure)(&self.y_new) > g.threshold {
                        self.locate_crossing(rhs, h, g);
                        return Ok(Outcome::GuardTripped);
                    }
                }
                self.stats.accepted += 1;
                self.t = if last { t_end } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.stats.rejected += 1;
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.25
                };
                self.h = h * factor;
                if self.h < self.h_min * self.t.abs().max(1.0) {
                    return Err(Error::Integrator {
                        t: self.t,
                        reason: format!("step size underflow (h = {:.3e})", self.h),
                    });
                }
            }
        }
        Ok(Outcome::Reached)
    }

    // Bisection on the step size for the guard crossing inside an
    // accepted step of length `h`.
    fn locate_crossing<F>(&mut self, rhs: &mut F, h: f64, g: &Guard<'_>)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let mut lo = 0.0;
        let mut hi = h;
        let mut best = self.y_new.clone();
        while hi - lo > g.time_tol && hi - lo > 4.0 * f64::EPSILON * self.t.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            let err = self.trial(rhs, mid);
            let tripped = !err.is_finite() || (g.measure)(&self.y_new) > g.threshold;
            if tripped {
                hi = mid;
                best.copy_from_slice(&self.y_new);
            } else {
                lo = mid;
            }
        }
        self.t += hi;
        self.y.copy_from_slice(&best);
        self.fsal_valid = false;
        self.stats.accepted += 1;
    }
}

/// Classical fourth-order Runge-Kutta step of fixed size.
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    pub fn step<F>(&mut self, rhs: &mut F, t: f64, y: &mut [f64], dt: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        rhs(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k1[i];
        }
        rhs(t + 0.5 * dt, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k2[i];
        }
        rhs(t + 0.5 * dt, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + dt * self.k3[i];
        }
        rhs(t + dt, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_to_tolerance() {
        let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let mut ode = Dopri5::new(0.0, vec![1.0], Tolerance::default());
        assert_eq!(ode.advance(&mut rhs, 1.0, None).unwrap(), Outcome::Reached);
        assert_eq!(ode.t(), 1.0);
        assert!((ode.y()[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_returns() {
        let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let mut ode = Dopri5::new(
            0.0,
            vec![1.0, 0.0],
            Tolerance {
                rtol: 1e-11,
                atol: 1e-13,
            },
        );
        ode.advance(&mut rhs, 2.0 * std::f64::consts::PI, None).unwrap();
        assert!((ode.y()[0] - 1.0).abs() < 1e-9);
        assert!(ode.y()[1].abs() < 1e-9);
    }

    #[test]
    fn guard_locates_riccati_singularity() {
        // y' = y^2, y(0) = 1 blows up at t = 1; y = 1e6 at t = 1 - 1e-6.
        let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let measure = |y: &[f64]| y[0];
        let guard = Guard {
            measure: &measure,
            threshold: 1e6,
            time_tol: 1e-12,
        };
        let mut ode = Dopri5::new(
            0.0,
            vec![1.0],
            Tolerance {
                rtol: 1e-10,
                atol: 1e-12,
            },
        );
        let out = ode.advance(&mut rhs, 2.0, Some(&guard)).unwrap();
        assert_eq!(out, Outcome::GuardTripped);
        assert!((ode.t() - (1.0 - 1e-6)).abs() < 1e-8, "t = {}", ode.t());
    }

    #[test]
    fn rk4_fourth_order() {
        let run = |dt: f64| {
            let mut rk = Rk4::new(1);
            let mut y = [1.0];
            let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -2.0 * y[0];
            let n = (1.0 / dt).round() as usize;
            for i in 0..n {
                rk.step(&mut rhs, i as f64 * dt, &mut y, dt);
            }
            (y[0] - (-2.0f64).exp()).abs()
        };
        let ratio = run(0.05) / run(0.025);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
