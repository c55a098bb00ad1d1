//! Twin-trajectory separation exponent with periodic renormalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::solver::{Propagator, StepControl};
use super::{l2_norm, ModalProblem, ModalState};
use crate::error::{Error, Result};

/// Number of renormalization intervals over the horizon.
const INTERVALS: usize = 200;
/// Leading fraction of the horizon left out of the average.
const WARM_UP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    /// Time-averaged growth rate of ln(gap).
    pub exponent: f64,
    /// A trajectory hit the blow-up guard; the exponent covers the time
    /// before that, warm-up included if the guard tripped during it.
    pub truncated: bool,
    pub renormalizations: usize,
    /// Time over which the average was taken.
    pub averaged_time: f64,
}

/// Unit vector with independent uniform components, from the seed.
fn random_direction(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = l2_norm(&v);
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn separation_exponent(
    problem: &ModalProblem,
    base: &ModalState,
    eta: f64,
    horizon: f64,
    seed: u64,
    control: StepControl,
) -> Result<SeparationResult> {
    if !(eta > 0.0) || !(horizon > 0.0) {
        return Err(Error::config("separation exponent needs eta > 0 and horizon > 0"));
    }
    let n = problem.mode_count();
    let dir = random_direction(n, seed);
    let twin_coeffs: Vec<f64> = base.coeffs.iter().zip(&dir).map(|(u, d)| u + eta * d).collect();
    let twin = ModalState::new(base.t, twin_coeffs, problem.lambdas());
    let mut a = Propagator::new(problem, base, control)?;
    let mut b = Propagator::new(problem, &twin, control)?;
    let dt = horizon / INTERVALS as f64;
    let warm_until = base.t + WARM_UP * horizon;
    let (mut sum, mut averaged_time, mut renormalizations) = (0.0, 0.0, 0);
    let (mut warm_sum, mut warm_time) = (0.0, 0.0);
    let mut truncated = false;
    let mut gap = vec![0.0; n];
    for i in 1..=INTERVALS {
        let t = base.t + i as f64 * dt;
        let (ea, eb) = (a.advance(t)?, b.advance(t)?);
        if ea.is_some() || eb.is_some() {
            truncated = true;
            break;
        }
        for ((g, x), y) in gap.iter_mut().zip(b.coeffs()).zip(a.coeffs()) {
            *g = x - y;
        }
        let d = l2_norm(&gap);
        if !(d > 0.0) {
            return Err(Error::Integrator {
                t,
                reason: "twin trajectories merged".into(),
            });
        }
        if t > warm_until + 1e-12 {
            sum += (d / eta).ln();
            averaged_time += dt;
        } else {
            warm_sum += (d / eta).ln();
            warm_time += dt;
        }
        let renorm: Vec<f64> = a.coeffs().iter().zip(&gap).map(|(u, g)| u + eta * g / d).collect();
        b.reset_coeffs(&renorm);
        renormalizations += 1;
    }
    if truncated && averaged_time == 0.0 {
        sum = warm_sum;
        averaged_time = warm_time;
    }
    let exponent = if averaged_time > 0.0 {
        sum / averaged_time
    } else {
        f64::NAN
    };
    Ok(SeparationResult {
        exponent,
        truncated,
        renormalizations,
        averaged_time,
    })
}
