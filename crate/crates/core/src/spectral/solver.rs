//! Time stepping of the modal system with the blow-up guard.

use serde::{Deserialize, Serialize};

use super::analysis::{compute_k0, split_projection};
use super::record::{Row, TrajectoryRecord};
use super::{l2_norm, ModalProblem, ModalState};
use crate::energy::bernoulli_tail;
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::ode::{Dopri5, Guard, Outcome, Tolerance};
use crate::regimes::classify_phase;

/// Accuracy and guard settings of the modal integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Blow-up guard on r.
    pub guard: f64,
    /// Absolute tolerance on the located guard crossing.
    pub time_tol: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-14,
            guard: 1e6,
            time_tol: 1e-12,
        }
    }
}

/// Guard trip with the estimated singular time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupEvent {
    /// Time at which r crossed the guard.
    pub guard_time: f64,
    /// Guard time plus the Bernoulli tail estimate from the guard state.
    pub time: f64,
    pub r_guard: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Advanced(ModalState),
    BlowUp { event: BlowupEvent, state: ModalState },
}

/// Change of the threshold index between two output times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K0Switch {
    pub t: f64,
    pub from: usize,
    pub to: usize,
}

pub(crate) struct Propagator<'a> {
    problem: &'a ModalProblem,
    ode: Dopri5,
    control: StepControl,
}

impl<'a> Propagator<'a> {
    pub(crate) fn new(problem: &'a ModalProblem, state: &ModalState, control: StepControl) -> Result<Self> {
        if state.coeffs.len() != problem.mode_count() {
            return Err(Error::config(format!(
                "state has {} coefficients for {} modes",
                state.coeffs.len(),
                problem.mode_count()
            )));
        }
        if state.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("state must be finite"));
        }
        let mut y = state.coeffs.clone();
        y.push(0.0);
        let ode = Dopri5::new(
            state.t,
            y,
            Tolerance {
                rtol: control.rtol,
                atol: control.atol,
            },
        );
        Ok(Self { problem, ode, control })
    }

    pub(crate) fn phi(&self) -> f64 {
        self.ode.y()[self.problem.mode_count()]
    }

    pub(crate) fn coeffs(&self) -> &[f64] {
        &self.ode.y()[..self.problem.mode_count()]
    }

    pub(crate) fn state(&self) -> ModalState {
        ModalState::new(self.ode.t(), self.coeffs().to_vec(), self.problem.lambdas())
    }

    pub(crate) fn reset_coeffs(&mut self, coeffs: &[f64]) {
        let mut y = coeffs.to_vec();
        y.push(self.phi());
        self.ode.reset_state(&y);
    }

    /// Advances to `t`; returns the blow-up event if the guard trips.
    pub(crate) fn advance(&mut self, t: f64) -> Result<Option<BlowupEvent>> {
        let n = self.problem.mode_count();
        let problem = self.problem;
        let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| problem.rhs(t, y, dy);
        let measure = move |y: &[f64]| l2_norm(&y[..n]);
        let guard = Guard {
            measure: &measure,
            threshold: self.control.guard,
            time_tol: self.control.time_tol,
        };
        match self.ode.advance(&mut rhs, t, Some(&guard))? {
            Outcome::Reached => Ok(None),
            Outcome::GuardTripped => {
                let s = self.state();
                Ok(Some(blowup_event(self.problem, &s)))
            }
        }
    }
}

fn blowup_event(problem: &ModalProblem, s: &ModalState) -> BlowupEvent {
    // r r' = -(a |grad u|^2 / r^2 + damping) r^2 + g r^{p1+2}, frozen
    let c = problem.averaged.a * (s.h1 * s.h1) / (s.r * s.r) + problem.damping(s.t, s.r);
    let tail = bernoulli_tail(s.r * s.r, c, problem.averaged.g_at(s.t), problem.exponents.p1(s.t));
    BlowupEvent {
        guard_time: s.t,
        time: s.t + tail,
        r_guard: s.r,
    }
}

/// Advances the state by dt.
pub fn step_system(problem: &ModalProblem, state: &ModalState, dt: f64, control: StepControl) -> Result<StepOutcome> {
    if !(dt >= 0.0) {
        return Err(Error::config(format!("step must be nonnegative, got {dt}")));
    }
    if !(state.r < control.guard) {
        return Err(Error::config("state is already beyond the blow-up guard"));
    }
    let mut prop = Propagator::new(problem, state, control)?;
    Ok(match prop.advance(state.t + dt)? {
        None => StepOutcome::Advanced(prop.state()),
        Some(event) => StepOutcome::BlowUp {
            event,
            state: prop.state(),
        },
    })
}

fn make_row(problem: &ModalProblem, state: &ModalState, phi: f64) -> Row {
    let t = state.t;
    let k0 = compute_k0(t, state.r, problem);
    let split = split_projection(state, k0.index, problem);
    Row {
        t,
        r: state.r,
        r_sq: state.r * state.r,
        k0: k0.index,
        p_norm_l2: split.p_l2,
        q_norm_l2: split.q_l2,
        p_norm_h1: split.p_h1,
        q_norm_h1: split.q_h1,
        rho: split.rho,
        p0: problem.exponents.p0(t),
        p1: problem.exponents.p1(t),
        phase: classify_phase(t, &problem.exponents),
        modes: state.coeffs.clone(),
        h1: state.h1,
        phi,
        phi_rate: problem.net_rate(t, state.r),
        k0_equality: k0.equality,
    }
}

/// Fraction of the energy held by the top tenth of the modes.
fn tail_fraction(coeffs: &[f64]) -> f64 {
    let n = coeffs.len();
    if n < 10 {
        return 0.0;
    }
    let top = n / 10;
    let total = l2_norm(coeffs).powi(2);
    if total == 0.0 {
        return 0.0;
    }
    l2_norm(&coeffs[n - top..]).powi(2) / total
}

/// Energy fraction in the top tenth of the modes above which a row counts
/// as under-resolved.
pub const TAIL_WARNING: f64 = 1e-6;

/// Integrates from `initial` to `t_end`, recording a row every `cadence`.
pub fn run(
    problem: &ModalProblem,
    initial: &ModalState,
    t_end: f64,
    cadence: f64,
    control: StepControl,
) -> Result<TrajectoryRecord> {
    if !(t_end > initial.t) || !(cadence > 0.0) {
        return Err(Error::config("run needs t_end after the start and a positive cadence"));
    }
    let mut prop = Propagator::new(problem, initial, control)?;
    let steps = ((t_end - initial.t) / cadence - 1e-9).ceil().max(1.0) as usize;
    let mut record = TrajectoryRecord::new(problem.mode_count());
    let push = |record: &mut TrajectoryRecord, row: Row| {
        if let Some(prev) = record.rows.last() {
            if prev.k0 != row.k0 {
                record.k0_switches.push(K0Switch {
                    t: row.t,
                    from: prev.k0,
                    to: row.k0,
                });
            }
        }
        if row.k0 > problem.mode_count() {
            record.truncation_warnings += 1;
        }
        if row.k0_equality {
            record.equality_events += 1;
        }
        if tail_fraction(&row.modes) > TAIL_WARNING {
            record.tail_warnings += 1;
        }
        record.rows.push(row);
    };
    push(&mut record, make_row(problem, initial, 0.0));
    for i in 1..=steps {
        let t = if i == steps {
            t_end
        } else {
            initial.t + i as f64 * cadence
        };
        let event = prop.advance(t)?;
        let row = make_row(problem, &prop.state(), prop.phi());
        push(&mut record, row);
        if let Some(event) = event {
            record.blowup = Some(event);
            break;
        }
    }
    Ok(record)
}

/// Runs a validated scenario from its start time to its horizon.
pub fn run_scenario(scenario: &Scenario) -> Result<TrajectoryRecord> {
    let problem = ModalProblem::from_scenario(scenario);
    let initial = ModalState::new(scenario.start, scenario.initial.clone(), problem.lambdas());
    let s = &scenario.solver;
    let control = StepControl {
        rtol: s.rtol,
        atol: s.atol,
        guard: s.guard,
        ..StepControl::default()
    };
    run(&problem, &initial, s.horizon, s.cadence, control)
}
