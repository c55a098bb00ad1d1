//! Finite-difference method-of-lines solver for the full equation on an
//! interval, used to cross-check the spectral solver.
//!
//! Diffusion uses conservative second-order differences with `a` at the
//! cell midpoints, the nonlocal norm uses the trapezoid rule, and time
//! stepping is classical RK4 under dt <= 0.8 h^2 / (2 max a).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::energy::bernoulli_tail;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{CoefficientSet, DomainKind, ExponentSchedule, Point, Scenario};
use crate::ode::Rk4;
use crate::spectral::{ModalProblem, ModalState, StepControl};

/// Smallest admissible number of interior nodes.
pub const MIN_NODES: usize = 8;
/// Safety factor on the explicit diffusion limit.
pub const CFL_SAFETY: f64 = 0.8;
/// Largest fraction of the inverse reaction rate taken per step.
const REACTION_SAFETY: f64 = 0.05;

/// Nodal values at the interior nodes x_i = i h, i = 1..=n, h = L/(n+1).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub t: f64,
    pub length: f64,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(length: f64, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::config(format!(
                "grid needs at least {MIN_NODES} interior nodes, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("interval length must be positive, got {length}")));
        }
        Ok(Self {
            t: 0.0,
            length,
            values: vec![0.0; n],
        })
    }

    pub fn from_fn(length: f64, n: usize, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(length, n)?;
        g.t = t;
        let h = g.spacing();
        for (i, v) in g.values.iter_mut().enumerate() {
            *v = f((i + 1) as f64 * h);
        }
        Ok(g)
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.values.len() + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing()
    }

    /// Trapezoid L2 norm; the boundary values are zero.
    pub fn norm_l2(&self) -> f64 {
        trapezoid_norm(&self.values, self.spacing())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `x,u` including the two boundary nodes.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "u"])?;
        out.write_record([fmt_f64(0.0), fmt_f64(0.0)])?;
        for (i, v) in self.values.iter().enumerate() {
            out.write_record([fmt_f64(self.x(i)), fmt_f64(*v)])?;
        }
        out.write_record([fmt_f64(self.length), fmt_f64(0.0)])?;
        out.flush()?;
        Ok(())
    }
}

fn trapezoid_norm(u: &[f64], h: f64) -> f64 {
    let mut s = 0.0;
    for v in u {
        s += v * v;
    }
    (h * s).sqrt()
}

/// Discretized equation on a fixed grid.
#[derive(Debug, Clone)]
pub struct FdProblem {
    pub length: f64,
    pub nodes: usize,
    pub fields: CoefficientSet,
    pub exponents: ExponentSchedule,
    a_half: Vec<f64>,
    b: Vec<f64>,
    f_space: Vec<f64>,
    g_space: Vec<f64>,
}

impl FdProblem {
    pub fn new(length: f64, nodes: usize, fields: CoefficientSet, exponents: ExponentSchedule) -> Result<Self> {
        GridField::zeros(length, nodes)?;
        let kind = DomainKind::Interval { length };
        let h = length / (nodes + 1) as f64;
        let at = |x: f64| Point::new(x, 0.0);
        let a_half = (0..=nodes)
            .map(|i| fields.a.eval(0.0, at((i as f64 + 0.5) * h), kind))
            .collect();
        let node = |i: usize| at((i + 1) as f64 * h);
        let b = (0..nodes).map(|i| fields.b.eval(0.0, node(i), kind)).collect();
        let f_space = (0..nodes).map(|i| fields.f.space.eval(node(i), kind)).collect();
        let g_space = (0..nodes).map(|i| fields.g.space.eval(node(i), kind)).collect();
        Ok(Self {
            length,
            nodes,
            fields,
            exponents,
            a_half,
            b,
            f_space,
            g_space,
        })
    }

    pub fn from_scenario(s: &Scenario, nodes: usize) -> Result<Self> {
        match s.domain.kind() {
            DomainKind::Interval { length } => Self::new(length, nodes, s.coefficients.clone(), s.exponents.clone()),
            DomainKind::Rectangle { .. } => {
                Err(Error::Domain("the finite-difference oracle is one-dimensional".into()))
            }
        }
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.nodes + 1) as f64
    }

    /// Explicit diffusion limit 0.8 h^2 / (2 max a).
    pub fn stable_dt(&self) -> f64 {
        let a_max = self.a_half.iter().fold(0.0f64, |m, v| m.max(*v));
        CFL_SAFETY * self.spacing().powi(2) / (2.0 * a_max)
    }

    fn reaction_rate(&self, t: f64, r: f64) -> f64 {
        let (fm, gm) = (self.fields.f.time.eval(t), self.fields.g.time.eval(t));
        let (p0, p1) = (self.exponents.p0(t), self.exponents.p1(t));
        let mut worst = 0.0f64;
        for i in 0..self.nodes {
            let rate =
                self.b[i].abs() + (self.f_space[i] * fm).abs() * r.powf(p0) + (self.g_space[i] * gm).abs() * r.powf(p1);
            worst = worst.max(rate);
        }
        worst
    }

    pub fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) {
        let n = self.nodes;
        let h = self.spacing();
        let inv_h2 = 1.0 / (h * h);
        let r = trapezoid_norm(u, h);
        let f_amp = self.fields.f.time.eval(t) * r.powf(self.exponents.p0(t));
        let g_amp = self.fields.g.time.eval(t) * r.powf(self.exponents.p1(t));
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { u[i - 1] };
            let right = if i + 1 == n { 0.0 } else { u[i + 1] };
            let diffusion = (self.a_half[i + 1] * (right - u[i]) - self.a_half[i] * (u[i] - left)) * inv_h2;
            du[i] = diffusion - self.b[i] * u[i] - self.f_space[i] * f_amp * u[i] + self.g_space[i] * g_amp * u[i];
        }
    }

    /// Effective damping and growth rates in the sense of the energy
    /// identity, used for the tail estimate after a guard trip.
    fn energy_rates(&self, t: f64, u: &[f64]) -> (f64, f64) {
        let h = self.spacing();
        let r2 = h * u.iter().map(|v| v * v).sum::<f64>();
        let mut lin = vec![0.0; u.len()];
        self.rhs(t, u, &mut lin);
        let r = r2.sqrt();
        let g_amp = self.fields.g.time.eval(t) * r.powf(self.exponents.p1(t));
        let growth_form = h * u.iter().zip(&self.g_space).map(|(v, g)| g * v * v).sum::<f64>();
        let total = h * u.iter().zip(&lin).map(|(v, d)| v * d).sum::<f64>();
        // total = -c r^2 + g_eff r^{p1+2}
        let damping = -(total - g_amp * growth_form) / r2;
        let g_eff = growth_form * self.fields.g.time.eval(t) / r2;
        (damping, g_eff)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FdOutcome {
    Reached(GridField),
    BlowUp { time: f64, state: GridField },
}

/// One RK4 step of size dt.
pub fn fd_step(problem: &FdProblem, state: &GridField, dt: f64) -> Result<GridField> {
    if state.nodes() != problem.nodes {
        return Err(Error::config("grid size does not match the problem"));
    }
    if !(dt > 0.0) || dt > problem.stable_dt() * (1.0 + 1e-12) {
        return Err(Error::config(format!(
            "time step {dt} violates the stability bound {}",
            problem.stable_dt()
        )));
    }
    let mut rk = Rk4::new(problem.nodes);
    let mut next = state.clone();
    rk.step(
        &mut |t, u: &[f64], du: &mut [f64]| problem.rhs(t, u, du),
        state.t,
        &mut next.values,
        dt,
    );
    next.t = state.t + dt;
    if next.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integrator {
            t: next.t,
            reason: "non-finite nodal values".into(),
        });
    }
    Ok(next)
}

/// Integrates to `t_end` with steps limited by diffusion and reaction
/// rates; the norm crossing `guard` ends the run as a blow-up.
pub fn fd_run(problem: &FdProblem, initial: &GridField, t_end: f64, guard: f64) -> Result<FdOutcome> {
    if initial.nodes() != problem.nodes {
        return Err(Error::config("grid size does not match the problem"));
    }
    let mut state = initial.clone();
    let mut rk = Rk4::new(problem.nodes);
    let mut rhs = |t, u: &[f64], du: &mut [f64]| problem.rhs(t, u, du);
    let dt_cfl = problem.stable_dt();
    while state.t < t_end {
        let r = state.norm_l2();
        let rate = problem.reaction_rate(state.t, r);
        let mut dt = dt_cfl;
        if rate > 0.0 {
            dt = dt.min(REACTION_SAFETY / rate);
        }
        let remaining = t_end - state.t;
        // land on t_end without a sliver step
        let steps = (remaining / dt).ceil().max(1.0);
        dt = remaining / steps;
        let prev = state.clone();
        rk.step(&mut rhs, state.t, &mut state.values, dt);
        state.t = if steps == 1.0 { t_end } else { state.t + dt };
        let r = state.norm_l2();
        if !r.is_finite() || r > guard {
            let (c, g) = problem.energy_rates(prev.t, &prev.values);
            let (time, at) = if r.is_finite() {
                (state.t, r)
            } else {
                (prev.t, prev.norm_l2())
            };
            let tail = bernoulli_tail(at * at, c, g, problem.exponents.p1(time));
            return Ok(FdOutcome::BlowUp {
                time: time + tail,
                state,
            });
        }
    }
    Ok(FdOutcome::Reached(state))
}

/// Differences between the spectral and finite-difference solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub l2_diff: f64,
    pub max_diff: f64,
    pub spectral_norm: f64,
    pub fd_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub nodes: usize,
    pub modes: usize,
    pub checkpoints: Vec<Checkpoint>,
    /// Coefficients vary in x, so part of the gap is the modeling error of
    /// the averaged spectral problem rather than solver error.
    pub averaging_gap_included: bool,
    pub spectral_blowup: Option<f64>,
    pub fd_blowup: Option<f64>,
}

/// Runs both solvers from the scenario's projected initial data and
/// compares them on the grid at each checkpoint.
pub fn compare_solvers(scenario: &Scenario, nodes: usize, checkpoints: &[f64]) -> Result<ComparisonReport> {
    let fd = FdProblem::from_scenario(scenario, nodes)?;
    let problem = ModalProblem::from_scenario(scenario);
    let domain = &scenario.domain;
    let start = scenario.start;
    let mut grid = GridField::from_fn(fd.length, nodes, start, |x| {
        domain.evaluate(&scenario.initial, Point::new(x, 0.0))
    })?;
    let mut modal = ModalState::new(start, scenario.initial.clone(), problem.lambdas());
    let control = StepControl {
        rtol: scenario.solver.rtol,
        atol: scenario.solver.atol,
        guard: scenario.solver.guard,
        ..StepControl::default()
    };
    let mut report = ComparisonReport {
        nodes,
        modes: problem.mode_count(),
        checkpoints: Vec::new(),
        averaging_gap_included: !scenario.coefficients.is_uniform(),
        spectral_blowup: None,
        fd_blowup: None,
    };
    let mut sorted = checkpoints.to_vec();
    sorted.sort_by(f64::total_cmp);
    for t in sorted.into_iter().filter(|t| *t > start) {
        match crate::spectral::step_system(&problem, &modal, t - modal.t, control)? {
            crate::spectral::StepOutcome::Advanced(s) => modal = s,
            crate::spectral::StepOutcome::BlowUp { event, .. } => report.spectral_blowup = Some(event.time),
        }
        match fd_run(&fd, &grid, t, scenario.solver.guard)? {
            FdOutcome::Reached(g) => grid = g,
            FdOutcome::BlowUp { time, .. } => report.fd_blowup = Some(time),
        }
        if report.spectral_blowup.is_some() || report.fd_blowup.is_some() {
            break;
        }
        let h = grid.spacing();
        let diffs: Vec<f64> = (0..nodes)
            .map(|i| domain.evaluate(&modal.coeffs, Point::new(grid.x(i), 0.0)) - grid.values[i])
            .collect();
        report.checkpoints.push(Checkpoint {
            t,
            l2_diff: trapezoid_norm(&diffs, h),
            max_diff: diffs.iter().fold(0.0, |m, d| m.max(d.abs())),
            spectral_norm: modal.r,
            fd_norm: grid.norm_l2(),
        });
    }
    Ok(report)
}

/// One entry of a grid/mode convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub modes: usize,
    pub l2_diff: f64,
}

/// Spectral-vs-FD gap at time `t` over all (nodes, modes) pairs.
pub fn convergence_table(scenario: &Scenario, nodes: &[usize], modes: &[usize], t: f64) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for &m in modes {
        let s = rebuild_with_modes(scenario, m)?;
        for &n in nodes {
            let rep = compare_solvers(&s, n, &[t])?;
            let l2_diff = rep.checkpoints.first().map_or(f64::NAN, |c| c.l2_diff);
            rows.push(ConvergenceRow {
                nodes: n,
                modes: m,
                l2_diff,
            });
        }
    }
    Ok(rows)
}

fn rebuild_with_modes(s: &Scenario, modes: usize) -> Result<Scenario> {
    let domain = crate::model::SpectralDomain::build(s.domain.kind(), modes)?;
    let mut out = s.clone();
    let mut c = s.initial.clone();
    c.resize(modes, 0.0);
    out.initial = c;
    out.domain = domain;
    Ok(out)
}

/// Max-norm errors of the heat equation u_t = u_xx on (0, pi) from sin x
/// at t_end, one per grid size.
pub fn heat_convergence(grids: &[usize], t_end: f64) -> Result<Vec<(usize, f64)>> {
    let fields = CoefficientSet::constant(1.0, 0.0, 0.0, 0.0);
    let exponents = ExponentSchedule::new(
        1.0,
        crate::model::Schedule::constant(0.0),
        crate::model::Schedule::constant(1.0),
    );
    let pi = std::f64::consts::PI;
    grids
        .iter()
        .map(|&n| {
            let p = FdProblem::new(pi, n, fields.clone(), exponents.clone())?;
            let u0 = GridField::from_fn(pi, n, 0.0, f64::sin)?;
            let FdOutcome::Reached(u) = fd_run(&p, &u0, t_end, f64::INFINITY)? else {
                return Err(Error::Integrator {
                    t: t_end,
                    reason: "heat run tripped the guard".into(),
                });
            };
            let decay = (-t_end).exp();
            let err = (0..n)
                .map(|i| (u.values[i] - decay * u.x(i).sin()).abs())
                .fold(0.0, f64::max);
            Ok((n, err))
        })
        .collect()
}

/// log2 of successive error ratios; grids are assumed to double in
/// resolution (h halving).
pub fn observed_orders(errors: &[(usize, f64)]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| {
            let h_ratio = (w[1].0 + 1) as f64 / (w[0].0 + 1) as f64;
            (w[0].1 / w[1].1).ln() / h_ratio.ln()
        })
        .collect()
}
