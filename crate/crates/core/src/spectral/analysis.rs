//! Threshold index, low/high splitting and trajectory diagnostics.

use serde::{Deserialize, Serialize};

use super::record::TrajectoryRecord;
use super::{ModalProblem, ModalState};
use crate::error::{Error, Result};
use crate::ode::Rk4;

/// Relative band in which a*lambda_k + b(t) = g(t) r^p1 counts as equality.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

/// Threshold index k0 = min{k : a lambda_k + b(t) > g(t) r^{p1(t)}}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct K0 {
    /// 1-based; N + 1 if no mode in the truncation qualifies.
    pub index: usize,
    /// Some mode sits on the threshold.
    pub equality: bool,
}

pub fn compute_k0(t: f64, r: f64, problem: &ModalProblem) -> K0 {
    let threshold = problem.growth(t, r);
    let damping = problem.damping(t, r);
    let band = EQUALITY_TOLERANCE * threshold.abs().max(1.0);
    let mut equality = false;
    for (k, lambda) in problem.lambdas().iter().enumerate() {
        let level = problem.averaged.a * lambda + damping;
        if (level - threshold).abs() <= band {
            equality = true;
            continue;
        }
        if level > threshold {
            return K0 { index: k + 1, equality };
        }
    }
    K0 {
        index: problem.mode_count() + 1,
        equality,
    }
}

/// Norms of P u (modes below k0) and Q u (modes from k0 on).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub k0: usize,
    pub p_l2: f64,
    pub q_l2: f64,
    pub p_h1: f64,
    pub q_h1: f64,
    /// Smallest eigenvalue among the nonzero low modes.
    pub lambda_j0: Option<f64>,
    /// a lambda_k0 + b(t) - g(t) r^p1; NaN when k0 = N + 1.
    pub rho: f64,
}

pub fn split_projection(state: &ModalState, k0: usize, problem: &ModalProblem) -> SplitReport {
    let lambdas = problem.lambdas();
    let n = lambdas.len();
    let cut = k0.saturating_sub(1).min(n);
    let (low, high) = state.coeffs.split_at(cut);
    let p_l2 = super::l2_norm(low);
    let q_l2 = super::l2_norm(high);
    let p_h1 = super::h1_norm(low, &lambdas[..cut]);
    let q_h1 = super::h1_norm(high, &lambdas[cut..]);
    let lambda_j0 = low.iter().position(|c| *c != 0.0).map(|k| lambdas[k]);
    let rho = if (1..=n).contains(&k0) {
        problem.averaged.a * lambdas[k0 - 1] + problem.damping(state.t, state.r) - problem.growth(state.t, state.r)
    } else {
        f64::NAN
    };
    SplitReport {
        k0,
        p_l2,
        q_l2,
        p_h1,
        q_h1,
        lambda_j0,
        rho,
    }
}

/// exp{-a lambda_k (tb - ta) - int_ta^tb (damping - growth)} along the
/// recorded run; u_k(tb) = factor * u_k(ta).
pub fn mode_growth_factor(
    k: usize,
    ta: f64,
    tb: f64,
    record: &TrajectoryRecord,
    problem: &ModalProblem,
) -> Result<f64> {
    if k == 0 || k > problem.mode_count() {
        return Err(Error::Range(format!("mode {k} outside 1..={}", problem.mode_count())));
    }
    let (Some(start), Some(end)) = (record.start_time(), record.end_time()) else {
        return Err(Error::Range("empty trajectory".into()));
    };
    if !(ta >= start && tb <= end && ta <= tb) {
        return Err(Error::Range(format!(
            "window [{ta}, {tb}] outside the run [{start}, {end}]"
        )));
    }
    let phi = |t: f64| accumulated_rate(record, t);
    let delta = phi(tb)? - phi(ta)?;
    Ok((-problem.averaged.a * problem.lambdas()[k - 1] * (tb - ta) - delta).exp())
}

/// Cubic Hermite interpolation of the recorded phi.
fn accumulated_rate(record: &TrajectoryRecord, t: f64) -> Result<f64> {
    let rows = &record.rows;
    let i = rows.partition_point(|r| r.t < t);
    let row = |j: usize| &rows[j];
    if i < rows.len() && row(i).t == t {
        return finite_phi(row(i).phi);
    }
    let (a, b) = (row(i - 1), row(i));
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    finite_phi(h00 * a.phi + h10 * h * a.phi_rate + h01 * b.phi + h11 * h * b.phi_rate)
}

fn finite_phi(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(
            "record carries no accumulated rate (read from CSV?)".into(),
        ))
    }
}

/// Band condition eps*s <= ||P u||_{H1_0} <= delta*s with
/// s = a lambda_k0 + b(t1).
pub fn cone_membership(state: &ModalState, k0: usize, eps: f64, delta: f64, problem: &ModalProblem) -> Result<bool> {
    if !(eps > 0.0 && eps < delta) {
        return Err(Error::config(format!(
            "cone band needs 0 < eps < delta, got ({eps}, {delta})"
        )));
    }
    let n = problem.mode_count();
    if !(1..=n).contains(&k0) {
        return Err(Error::Range(format!(
            "k0 = {k0} has no eigenvalue within the truncation"
        )));
    }
    let scale = problem.averaged.a * problem.lambdas()[k0 - 1] + problem.damping(state.t, state.r);
    let dist = split_projection(state, k0, problem).p_h1;
    Ok(dist >= eps * scale && dist <= delta * scale)
}

/// Long-time classification of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum VerdictTag {
    GrowthUnbounded,
    DecayToZero,
    BoundedBand { r_low: f64, r_high: f64 },
    BlowUp { time: f64 },
    Indeterminate,
}

impl VerdictTag {
    pub fn name(&self) -> &'static str {
        match self {
            VerdictTag::GrowthUnbounded => "growth_unbounded",
            VerdictTag::DecayToZero => "decay_to_zero",
            VerdictTag::BoundedBand { .. } => "bounded_band",
            VerdictTag::BlowUp { .. } => "blow_up",
            VerdictTag::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictStats {
    pub r_min: f64,
    pub r_max: f64,
    /// Least-squares slope of ln r over the tail window.
    pub slope: f64,
    pub k0_switches: usize,
    pub separation_exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVerdict {
    pub tag: VerdictTag,
    pub stats: VerdictStats,
}

/// Slope of ln r below which the tail counts as flat.
pub const SLOPE_THRESHOLD: f64 = 1e-3;
/// Norm below which a run has decayed.
pub const DECAY_FLOOR: f64 = 1e-8;

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mt, ml) = points.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + t / n, b + l / n));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in points {
        sxy += (t - mt) * (l - ml);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Classifies the run over its last `tail_window` time units; a window of
/// zero means the last quarter of the run.
pub fn classify_trajectory(record: &TrajectoryRecord, tail_window: f64) -> Result<TrajectoryVerdict> {
    let (Some(start), Some(end)) = (record.start_time(), record.end_time()) else {
        return Err(Error::Range("empty trajectory".into()));
    };
    let span = end - start;
    if tail_window > span || tail_window < 0.0 {
        return Err(Error::Range(format!(
            "tail window {tail_window} exceeds the run length {span}"
        )));
    }
    let window = if tail_window == 0.0 { 0.25 * span } else { tail_window };
    let tail: Vec<_> = record.rows.iter().filter(|r| r.t >= end - window - 1e-12).collect();
    let r_min = tail.iter().map(|r| r.r).fold(f64::INFINITY, f64::min);
    let r_max = tail.iter().map(|r| r.r).fold(f64::NEG_INFINITY, f64::max);
    let points: Vec<(f64, f64)> = tail.iter().filter(|r| r.r > 0.0).map(|r| (r.t, r.r.ln())).collect();
    let slope = if points.len() >= 2 { log_slope(&points) } else { 0.0 };
    let stats = VerdictStats {
        r_min,
        r_max,
        slope,
        k0_switches: record.k0_switches.len(),
        separation_exponent: None,
    };
    if let Some(ev) = &record.blowup {
        return Ok(TrajectoryVerdict {
            tag: VerdictTag::BlowUp { time: ev.time },
            stats,
        });
    }
    let last = record.rows.last().map_or(0.0, |r| r.r);
    if last < DECAY_FLOOR {
        return Ok(TrajectoryVerdict {
            tag: VerdictTag::DecayToZero,
            stats,
        });
    }
    let tag = if points.len() < 4 {
        VerdictTag::Indeterminate
    } else {
        let half = points.len() / 2;
        let early = log_slope(&points[..half]);
        let late = log_slope(&points[half..]);
        let all = [slope, early, late];
        if all.iter().all(|s| *s >= SLOPE_THRESHOLD) {
            VerdictTag::GrowthUnbounded
        } else if all.iter().all(|s| *s <= -SLOPE_THRESHOLD) {
            VerdictTag::DecayToZero
        } else if all.iter().all(|s| s.abs() < SLOPE_THRESHOLD) && r_min > 0.0 {
            VerdictTag::BoundedBand {
                r_low: r_min,
                r_high: r_max,
            }
        } else {
            VerdictTag::Indeterminate
        }
    };
    Ok(TrajectoryVerdict { tag, stats })
}

/// Largest relative residual of the energy identity
/// (1/2) d(r^2)/dt = -a |grad u|^2 - damping r^2 + g r^{p1+2}
/// over the recorded rows. The derivative is a one-sided five-point
/// difference of short fixed-step RK4 continuations from each row.
pub fn energy_identity_residual(record: &TrajectoryRecord, problem: &ModalProblem) -> Result<f64> {
    let n = problem.mode_count();
    let lambdas = problem.lambdas();
    let mut rk = Rk4::new(n + 1);
    let mut worst = 0.0f64;
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| problem.rhs(t, y, dy);
    for row in &record.rows {
        if row.modes.len() != n {
            return Err(Error::config("energy check needs the per-mode coefficients"));
        }
        if !(row.r > 0.0) || row.r >= 1e6 {
            continue;
        }
        let (t, r) = (row.t, row.r);
        let h1_sq = super::h1_norm(&row.modes, lambdas).powi(2);
        let a = problem.averaged.a;
        let diffusion = a * h1_sq;
        let damping = problem.damping(t, r) * r * r;
        let growth = problem.growth(t, r) * r * r;
        let predicted = -diffusion - damping + growth;
        let scale = diffusion.abs() + damping.abs() + growth.abs();
        if scale == 0.0 {
            continue;
        }
        let fastest = a * lambdas[n - 1] + problem.damping(t, r).abs() + problem.growth(t, r).abs();
        let h = 0.02 / (2.0 * fastest);
        let sub = 8;
        let mut y = row.modes.clone();
        y.push(0.0);
        let mut samples = [0.0; 5];
        samples[0] = r * r;
        for sample in samples.iter_mut().skip(1) {
            let mut s = 0.0;
            for _ in 0..sub {
                let tt = t + s;
                rk.step(&mut rhs, tt, &mut y, h / sub as f64);
                s += h / sub as f64;
            }
            *sample = super::l2_norm(&y[..n]).powi(2);
        }
        // advance time offsets: samples are at t, t+h, ..., t+4h
        let d = (-25.0 * samples[0] + 48.0 * samples[1] - 36.0 * samples[2] + 16.0 * samples[3] - 3.0 * samples[4])
            / (12.0 * h);
        let residual = (0.5 * d - predicted).abs() / scale;
        worst = worst.max(residual);
    }
    Ok(worst)
}
