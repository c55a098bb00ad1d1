//! Galerkin system for the averaged problem on the Dirichlet eigenbasis,
//! with the low/high mode splitting and long-time diagnostics.
//!
//! Each mode obeys
//! u_k' = -(a lambda_k + b + f(t) r^{p0(t)}) u_k + g(t) r^{p1(t)} u_k
//! with r = ||u||, so the whole nonlinearity enters through one scalar.

mod analysis;
mod record;
mod separation;
mod solver;

pub use analysis::{
    classify_trajectory, compute_k0, cone_membership, energy_identity_residual, mode_growth_factor, split_projection,
    SplitReport, TrajectoryVerdict, VerdictStats, VerdictTag, K0,
};
pub use record::{Row, TrajectoryRecord};
pub use separation::{separation_exponent, SeparationResult};
pub use solver::{run, run_scenario, step_system, BlowupEvent, K0Switch, StepControl, StepOutcome};

use serde::{Deserialize, Serialize};

use crate::model::{CoefficientSet, ExponentSchedule, Modulation, Scenario, SpectralDomain};

/// Domain averages of the coefficients; f and g keep their time factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averaged {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    #[serde(default)]
    pub f_time: Modulation,
    pub g: f64,
    #[serde(default)]
    pub g_time: Modulation,
}

impl Averaged {
    pub fn constant(a: f64, b: f64, f: f64, g: f64) -> Self {
        Self {
            a,
            b,
            f,
            f_time: Modulation::None,
            g,
            g_time: Modulation::None,
        }
    }

    pub fn from_fields(set: &CoefficientSet, domain: &SpectralDomain) -> Self {
        Self {
            a: set.a.mean(0.0, domain),
            b: set.b.mean(0.0, domain),
            f: set.f.space_mean(domain),
            f_time: set.f.time.clone(),
            g: set.g.space_mean(domain),
            g_time: set.g.time.clone(),
        }
    }

    pub fn f_at(&self, t: f64) -> f64 {
        self.f * self.f_time.eval(t)
    }

    pub fn g_at(&self, t: f64) -> f64 {
        self.g * self.g_time.eval(t)
    }
}

/// The truncated modal system.
#[derive(Debug, Clone)]
pub struct ModalProblem {
    pub domain: SpectralDomain,
    pub averaged: Averaged,
    pub exponents: ExponentSchedule,
    lambdas: Vec<f64>,
}

impl ModalProblem {
    pub fn new(domain: SpectralDomain, averaged: Averaged, exponents: ExponentSchedule) -> Self {
        let lambdas = domain.eigenvalues();
        Self {
            domain,
            averaged,
            exponents,
            lambdas,
        }
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self::new(
            s.domain.clone(),
            Averaged::from_fields(&s.coefficients, &s.domain),
            s.exponents.clone(),
        )
    }

    pub fn mode_count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// b + f(t) r^{p0(t)}
    pub fn damping(&self, t: f64, r: f64) -> f64 {
        self.averaged.b + self.averaged.f_at(t) * r.powf(self.exponents.p0(t))
    }

    /// g(t) r^{p1(t)}
    pub fn growth(&self, t: f64, r: f64) -> f64 {
        self.averaged.g_at(t) * r.powf(self.exponents.p1(t))
    }

    /// Net mode-independent rate damping - growth.
    pub fn net_rate(&self, t: f64, r: f64) -> f64 {
        self.damping(t, r) - self.growth(t, r)
    }

    /// Right-hand side on [u_1..u_N, phi] where phi accumulates net_rate.
    pub(crate) fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.lambdas.len();
        let r = l2_norm(&y[..n]);
        let c = self.net_rate(t, r);
        let a = self.averaged.a;
        for k in 0..n {
            dy[k] = -(a * self.lambdas[k] + c) * y[k];
        }
        dy[n] = c;
    }
}

/// Sequential sum of squares; fixed order keeps runs reproducible.
pub(crate) fn l2_norm(u: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in u {
        s += v * v;
    }
    s.sqrt()
}

pub(crate) fn h1_norm(u: &[f64], lambdas: &[f64]) -> f64 {
    let mut s = 0.0;
    for (v, l) in u.iter().zip(lambdas) {
        s += l * v * v;
    }
    s.sqrt()
}

/// Modal coefficients at time t with cached norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub t: f64,
    pub coeffs: Vec<f64>,
    pub r: f64,
    pub h1: f64,
}

impl ModalState {
    pub fn new(t: f64, coeffs: Vec<f64>, lambdas: &[f64]) -> Self {
        let r = l2_norm(&coeffs);
        let h1 = h1_norm(&coeffs, lambdas);
        Self { t, coeffs, r, h1 }
    }

    /// State holding `amplitude` on mode k (1-based).
    pub fn single_mode(t: f64, k: usize, amplitude: f64, lambdas: &[f64]) -> Self {
        let mut c = vec![0.0; lambdas.len()];
        c[k - 1] = amplitude;
        Self::new(t, c, lambdas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Schedule;

    #[test]
    fn cached_norms_match() {
        let d = SpectralDomain::interval(std::f64::consts::PI, 3).unwrap();
        let s = ModalState::new(0.0, vec![1.0, 1.0, 1.0], &d.eigenvalues());
        assert!((s.r - 3f64.sqrt()).abs() < 1e-15);
        assert!((s.h1 - 14f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn damping_includes_f_term() {
        let d = SpectralDomain::interval(1.0, 2).unwrap();
        let ex = ExponentSchedule::new(2.0, Schedule::constant(1.0), Schedule::constant(0.5));
        let p = ModalProblem::new(d, Averaged::constant(1.0, 2.0, 3.0, 4.0), ex);
        assert_eq!(p.damping(0.0, 4.0), 2.0 + 12.0);
        assert_eq!(p.growth(0.0, 4.0), 8.0);
        assert_eq!(p.net_rate(0.0, 4.0), 6.0);
    }
}
