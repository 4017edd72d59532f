//! Method-of-lines evolution of the Born-Infeld and radial membrane
//! equations as first-order systems in `(u, p = u_t, q = u_x)`.
//!
//! The spatial domain is never given boundary data by guesswork. Under
//! `Excision` the end nodes are dropped as the inward characteristic passes
//! them, so only the numerical domain of dependence is evolved. Under
//! `ExactData` the edges shrink with the backward cone of a known closed-form
//! solution and the end nodes are driven by its exact time derivatives.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::closedform::{ClosedFormSolution, Family};
use crate::conserved::{momentum_density, momentum_integral};
use crate::error::{LabError, Result};
use crate::numerics::{log_log_fit, FitResult, Grid1D, SampledField2};
use crate::residual::{discrete_residual, EquationId, ReportBuilder, ResidualReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    BornInfeld,
    /// Radial membrane on `[0, R]` with the axis at node 0.
    RadialMembrane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryTreatment {
    Excision,
    ExactData { solution: ClosedFormSolution },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub equation: Equation,
    pub blowup_time_hint: Option<f64>,
    pub cfl_safety: f64,
    pub dissipation: f64,
    pub t_end: f64,
    pub max_gradient: f64,
    pub min_discriminant_floor: f64,
    pub dt_floor: f64,
    pub boundary: BoundaryTreatment,
    /// Snapshot cadence in steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub max_steps: usize,
}

impl EvolutionConfig {
    pub const DEFAULT_CFL: f64 = 0.5;
    pub const DEFAULT_DISSIPATION: f64 = 0.01;
    pub const DEFAULT_FLOOR: f64 = 1e-6;
    pub const DEFAULT_DT_FLOOR: f64 = 1e-12;

    pub fn new(equation: Equation, t_end: f64) -> Self {
        EvolutionConfig {
            equation,
            blowup_time_hint: None,
            cfl_safety: Self::DEFAULT_CFL,
            dissipation: Self::DEFAULT_DISSIPATION,
            t_end,
            max_gradient: 1e8,
            min_discriminant_floor: Self::DEFAULT_FLOOR,
            dt_floor: Self::DEFAULT_DT_FLOOR,
            boundary: BoundaryTreatment::Excision,
            snapshot_every: 0,
            max_steps: 10_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(LabError::invalid(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.dissipation >= 0.0 && self.dissipation.is_finite()) {
            return Err(LabError::invalid("dissipation must be >= 0"));
        }
        if !self.t_end.is_finite() {
            return Err(LabError::invalid("t_end must be finite"));
        }
        if !(self.max_gradient > 0.0 && self.min_discriminant_floor > 0.0 && self.dt_floor > 0.0) {
            return Err(LabError::invalid(
                "max_gradient, discriminant floor and dt floor must be > 0",
            ));
        }
        if let BoundaryTreatment::ExactData { solution } = self.boundary {
            let ok = match self.equation {
                Equation::BornInfeld => solution.family() == Family::BornInfeldLog,
                Equation::RadialMembrane => {
                    solution.family().is_membrane() || solution.family() == Family::ConstantProfile
                }
            };
            if !ok {
                return Err(LabError::invalid(format!(
                    "{} cannot drive {:?} edges",
                    solution.family().name(),
                    self.equation
                )));
            }
        }
        Ok(())
    }
}

/// `1 - p^2 + q^2`.
pub fn discriminant(p: f64, q: f64) -> f64 {
    1.0 - p * p + q * q
}

/// Roots of `(1 + q^2) l^2 + 2 p q l - (1 - p^2) = 0`, i.e.
/// `(-pq -+ sqrt(1 - p^2 + q^2)) / (1 + q^2)`, ordered `(minus, plus)`.
pub fn characteristic_speeds(p: f64, q: f64) -> (f64, f64) {
    let root = discriminant(p, q).max(0.0).sqrt();
    let den = 1.0 + q * q;
    ((-p * q - root) / den, (-p * q + root) / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    pub grid: Grid1D,
    pub t: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Inclusive range of evolved nodes.
    pub active: (usize, usize),
    /// Continuous edge positions; the active nodes lie between them.
    pub edges: (f64, f64),
    pub min_discriminant: f64,
}

impl EvolutionState {
    pub fn new(grid: Grid1D, t: f64, u: Vec<f64>, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if u.len() != n || p.len() != n || q.len() != n {
            return Err(LabError::invalid(format!(
                "state arrays must have {n} entries, got {}, {}, {}",
                u.len(),
                p.len(),
                q.len()
            )));
        }
        for (name, a) in [("u", &u), ("p", &p), ("q", &q)] {
            if let Some(i) = a.iter().position(|v| !v.is_finite()) {
                return Err(LabError::NonFinite {
                    location: format!("initial {name} at x = {}", grid.node(i)),
                });
            }
        }
        if !t.is_finite() {
            return Err(LabError::invalid("initial time must be finite"));
        }
        let mut s = EvolutionState {
            grid,
            t,
            u,
            p,
            q,
            active: (0, n - 1),
            edges: (grid.lo(), grid.hi()),
            min_discriminant: 0.0,
        };
        s.refresh_min_discriminant();
        Ok(s)
    }

    pub fn zero(grid: Grid1D, t: f64) -> Self {
        let n = grid.len();
        Self::new(grid, t, vec![0.0; n], vec![0.0; n], vec![0.0; n]).expect("zero state is valid")
    }

    /// Samples `(u, p, q)` from `f(x)`.
    pub fn from_fn(grid: Grid1D, t: f64, f: impl Fn(f64) -> (f64, f64, f64)) -> Result<Self> {
        let mut u = Vec::with_capacity(grid.len());
        let mut p = Vec::with_capacity(grid.len());
        let mut q = Vec::with_capacity(grid.len());
        for x in grid.nodes() {
            let (a, b, c) = f(x);
            u.push(a);
            p.push(b);
            q.push(c);
        }
        Self::new(grid, t, u, p, q)
    }

    pub fn from_closed_form(sol: &ClosedFormSolution, grid: Grid1D, t: f64) -> Result<Self> {
        let mut u = Vec::with_capacity(grid.len());
        let mut p = Vec::with_capacity(grid.len());
        let mut q = Vec::with_capacity(grid.len());
        for x in grid.nodes() {
            let j = sol.evaluate_jet((t, x))?;
            u.push(j.value);
            p.push(j.da);
            q.push(j.db);
        }
        Self::new(grid, t, u, p, q)
    }

    pub fn refresh_min_discriminant(&mut self) {
        let (lo, hi) = self.active;
        self.min_discriminant = (lo..=hi)
            .map(|i| discriminant(self.p[i], self.q[i]))
            .fold(f64::INFINITY, f64::min);
    }

    pub fn active_len(&self) -> usize {
        self.active.1 - self.active.0 + 1
    }

    /// `max |q - D_x u|` over interior active nodes (central differences).
    pub fn consistency_defect(&self) -> f64 {
        let h = self.grid.spacing();
        let (lo, hi) = self.active;
        (lo + 1..hi)
            .map(|i| (self.q[i] - (self.u[i + 1] - self.u[i - 1]) / (2.0 * h)).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_q(&self) -> f64 {
        let (lo, hi) = self.active;
        self.q[lo..=hi].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of an active node at `x = 0`, if any.
    pub fn origin_index(&self) -> Option<usize> {
        let h = self.grid.spacing();
        let i = self.grid.nearest(0.0);
        (self.grid.node(i).abs() <= 0.5 * h && i >= self.active.0 && i <= self.active.1)
            .then_some(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

/// Difference operators on the active range. With `axis`, node 0 is a
/// reflection point and ghosts are `f(-i) = +-f(i)`.
#[derive(Debug, Clone, Copy)]
struct Ops {
    lo: usize,
    hi: usize,
    h: f64,
    axis: bool,
}

impl Ops {
    fn at(&self, f: &[f64], i: isize, parity: Parity) -> f64 {
        if i >= 0 {
            f[i as usize]
        } else {
            let v = f[(-i) as usize];
            match parity {
                Parity::Even => v,
                Parity::Odd => -v,
            }
        }
    }

    fn d1(&self, f: &[f64], i: usize, parity: Parity) -> f64 {
        let h = self.h;
        if i > self.lo && i < self.hi {
            (f[i + 1] - f[i - 1]) / (2.0 * h)
        } else if i == self.lo && self.axis {
            (f[1] - self.at(f, -1, parity)) / (2.0 * h)
        } else if i == self.lo {
            (-3.0 * f[i] + 4.0 * f[i + 1] - f[i + 2]) / (2.0 * h)
        } else {
            (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h)
        }
    }

    /// Fourth difference where a full five-point stencil fits.
    fn delta4(&self, f: &[f64], i: usize, parity: Parity) -> Option<f64> {
        let lo_ok = if self.axis { true } else { i >= self.lo + 2 };
        if !lo_ok || i + 2 > self.hi {
            return None;
        }
        let k = i as isize;
        Some(
            self.at(f, k + 2, parity) - 4.0 * self.at(f, k + 1, parity) + 6.0 * f[i]
                - 4.0 * self.at(f, k - 1, parity)
                + self.at(f, k - 2, parity),
        )
    }
}

/// Time derivatives of `(u, p, q)`; zero outside the active range.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

fn rates_core(
    eq: Equation,
    grid: &Grid1D,
    active: (usize, usize),
    (u, p, q): (&[f64], &[f64], &[f64]),
    dissipation: f64,
) -> Result<Rates> {
    let n = grid.len();
    let (lo, hi) = active;
    if hi < lo + 2 {
        return Err(LabError::Arity {
            needed: 3,
            got: hi + 1 - lo,
        });
    }
    let h = grid.spacing();
    let ops = Ops {
        lo,
        hi,
        h,
        axis: eq == Equation::RadialMembrane && lo == 0,
    };
    let mut r = Rates {
        u: vec![0.0; n],
        p: vec![0.0; n],
        q: vec![0.0; n],
    };
    let ko = dissipation / (16.0 * h);
    for i in lo..=hi {
        let (pi, qi) = (p[i], q[i]);
        let dp = ops.d1(p, i, Parity::Even);
        let dq = ops.d1(q, i, Parity::Odd);
        let mut num = (1.0 - pi * pi) * dq + 2.0 * pi * qi * dp;
        if eq == Equation::RadialMembrane {
            let x = grid.node(i);
            // q / r -> q_r on the axis
            let q_over_r = if ops.axis && i == 0 { dq } else { qi / x };
            num += q_over_r * discriminant(pi, qi);
        }
        let mut pdot = num / (1.0 + qi * qi);
        let mut qdot = dp;
        if ko > 0.0 {
            if let Some(d) = ops.delta4(p, i, Parity::Even) {
                pdot -= ko * d;
            }
            if let Some(d) = ops.delta4(q, i, Parity::Odd) {
                qdot -= ko * d;
            }
        }
        if !(pdot.is_finite() && qdot.is_finite()) {
            return Err(LabError::NonFinite {
                location: format!("rhs at x = {}", grid.node(i)),
            });
        }
        r.u[i] = pi;
        r.p[i] = pdot;
        r.q[i] = qdot;
    }
    let _ = u;
    Ok(r)
}

/// Semi-discrete right-hand side with one-sided stencils at the active ends
/// (and ghost reflection on the membrane axis).
pub fn rhs(eq: Equation, state: &EvolutionState, dissipation: f64) -> Result<Rates> {
    rates_core(
        eq,
        &state.grid,
        state.active,
        (&state.u, &state.p, &state.q),
        dissipation,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ReachedEnd,
    MaxGradient,
    DegeneracyFloor,
    StepFloor,
    DomainExhausted,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepOutcome {
    Advanced { dt: f64 },
    Stopped(StopReason),
}

/// Bookkeeping that turns the momentum integral over a shrinking domain
/// into a conserved quantity: pieces removed with dropped nodes are kept,
/// and the boundary flux `[w q / S]` is integrated in time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentumBudget {
    pub dropped: f64,
    pub flux: f64,
}

fn weight(eq: Equation, x: f64) -> f64 {
    match eq {
        Equation::BornInfeld => 1.0,
        Equation::RadialMembrane => x,
    }
}

fn weighted_momentum(
    eq: Equation,
    grid: &Grid1D,
    p: &[f64],
    q: &[f64],
    lo: usize,
    hi: usize,
) -> Result<f64> {
    let h = grid.spacing();
    let mut acc = 0.0;
    for i in lo..=hi {
        let m = weight(eq, grid.node(i)) * momentum_density(p[i], q[i])?;
        acc += if i == lo || i == hi { 0.5 * m } else { m };
    }
    Ok(acc * h)
}

fn boundary_flux(eq: Equation, grid: &Grid1D, p: &[f64], q: &[f64], lo: usize, hi: usize) -> f64 {
    let f = |i: usize| weight(eq, grid.node(i)) * q[i] / discriminant(p[i], q[i]).max(0.0).sqrt();
    f(hi) - f(lo)
}

fn stage_rates(
    cfg: &EvolutionConfig,
    grid: &Grid1D,
    active: (usize, usize),
    t: f64,
    y: (&[f64], &[f64], &[f64]),
) -> Result<Rates> {
    let mut r = rates_core(cfg.equation, grid, active, y, cfg.dissipation)?;
    if let BoundaryTreatment::ExactData { solution } = cfg.boundary {
        let (lo, hi) = active;
        let mut ends = vec![hi];
        if !(cfg.equation == Equation::RadialMembrane && lo == 0) {
            ends.push(lo);
        }
        for i in ends {
            let j = solution.evaluate_jet((t, grid.node(i)))?;
            r.u[i] = j.da;
            r.p[i] = j.daa;
            r.q[i] = j.dab;
        }
    }
    Ok(r)
}

fn advance(
    state: &mut EvolutionState,
    cfg: &EvolutionConfig,
    budget: Option<&mut MomentumBudget>,
) -> Result<StepOutcome> {
    if state.active_len() < 4 {
        return Ok(StepOutcome::Stopped(StopReason::DomainExhausted));
    }
    if state.min_discriminant <= cfg.min_discriminant_floor {
        return Ok(StepOutcome::Stopped(StopReason::DegeneracyFloor));
    }
    if state.sup_q() > cfg.max_gradient {
        return Ok(StepOutcome::Stopped(StopReason::MaxGradient));
    }
    let remaining = cfg.t_end - state.t;
    if remaining <= 1e-14 * cfg.t_end.abs().max(1.0) {
        return Ok(StepOutcome::Stopped(StopReason::ReachedEnd));
    }
    let (lo, hi) = state.active;
    let grid = state.grid;
    let h = grid.spacing();
    let mut max_speed: f64 = 0.0;
    for i in lo..=hi {
        let (a, b) = characteristic_speeds(state.p[i], state.q[i]);
        max_speed = max_speed.max(a.abs()).max(b.abs());
    }
    let mut dt = cfg.cfl_safety * h / max_speed.max(1e-300);
    if remaining < dt {
        dt = remaining;
    }
    if dt < cfg.dt_floor {
        return Ok(StepOutcome::Stopped(StopReason::StepFloor));
    }
    // inward edge speeds from the pre-step ends
    let right_speed = (hi - 1..=hi)
        .map(|i| (-characteristic_speeds(state.p[i], state.q[i]).0).max(0.0))
        .fold(0.0, f64::max);
    let left_speed = (lo..=lo + 1)
        .map(|i| characteristic_speeds(state.p[i], state.q[i]).1.max(0.0))
        .fold(0.0, f64::max);

    let n = grid.len();
    let t0 = state.t;
    let combine = |base: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        (0..n).map(|i| base[i] + s * k[i]).collect()
    };
    let (u0, p0, q0) = (&state.u, &state.p, &state.q);
    let k1 = stage_rates(cfg, &grid, state.active, t0, (u0, p0, q0))?;
    let (u1, p1, q1) = (
        combine(u0, &k1.u, 0.5 * dt),
        combine(p0, &k1.p, 0.5 * dt),
        combine(q0, &k1.q, 0.5 * dt),
    );
    let k2 = stage_rates(cfg, &grid, state.active, t0 + 0.5 * dt, (&u1, &p1, &q1))?;
    let (u2, p2, q2) = (
        combine(u0, &k2.u, 0.5 * dt),
        combine(p0, &k2.p, 0.5 * dt),
        combine(q0, &k2.q, 0.5 * dt),
    );
    let k3 = stage_rates(cfg, &grid, state.active, t0 + 0.5 * dt, (&u2, &p2, &q2))?;
    let (u3, p3, q3) = (
        combine(u0, &k3.u, dt),
        combine(p0, &k3.p, dt),
        combine(q0, &k3.q, dt),
    );
    let k4 = stage_rates(cfg, &grid, state.active, t0 + dt, (&u3, &p3, &q3))?;

    if let Some(b) = budget {
        let f = |p: &[f64], q: &[f64]| boundary_flux(cfg.equation, &grid, p, q, lo, hi);
        b.flux += dt / 6.0 * (f(p0, q0) + 2.0 * f(&p1, &q1) + 2.0 * f(&p2, &q2) + f(&p3, &q3));
        advance_fields(state, dt, [&k1, &k2, &k3, &k4]);
        move_edges(state, cfg, dt, t0, left_speed, right_speed, Some(b))?;
    } else {
        advance_fields(state, dt, [&k1, &k2, &k3, &k4]);
        move_edges(state, cfg, dt, t0, left_speed, right_speed, None)?;
    }
    state.t = t0 + dt;
    if cfg.equation == Equation::RadialMembrane && state.active.0 == 0 {
        state.q[0] = 0.0;
    }
    for i in state.active.0..=state.active.1 {
        if !(state.u[i].is_finite() && state.p[i].is_finite() && state.q[i].is_finite()) {
            return Err(LabError::NonFinite {
                location: format!("state at t = {}, x = {}", state.t, grid.node(i)),
            });
        }
    }
    state.refresh_min_discriminant();
    Ok(StepOutcome::Advanced { dt })
}

fn advance_fields(state: &mut EvolutionState, dt: f64, k: [&Rates; 4]) {
    let w = dt / 6.0;
    for i in state.active.0..=state.active.1 {
        state.u[i] += w * (k[0].u[i] + 2.0 * k[1].u[i] + 2.0 * k[2].u[i] + k[3].u[i]);
        state.p[i] += w * (k[0].p[i] + 2.0 * k[1].p[i] + 2.0 * k[2].p[i] + k[3].p[i]);
        state.q[i] += w * (k[0].q[i] + 2.0 * k[1].q[i] + 2.0 * k[2].q[i] + k[3].q[i]);
    }
}

fn move_edges(
    state: &mut EvolutionState,
    cfg: &EvolutionConfig,
    dt: f64,
    t0: f64,
    left_speed: f64,
    right_speed: f64,
    budget: Option<&mut MomentumBudget>,
) -> Result<()> {
    let axis = cfg.equation == Equation::RadialMembrane && state.active.0 == 0;
    let (mut el, mut er) = state.edges;
    match cfg.boundary {
        BoundaryTreatment::Excision => {
            er -= right_speed * dt;
            if !axis {
                el += left_speed * dt;
            }
        }
        BoundaryTreatment::ExactData { solution } => {
            let tb = solution.blowup_time();
            let shrink = (tb - (t0 + dt)) / (tb - t0);
            er *= shrink;
            if !axis {
                el *= shrink;
            }
        }
    }
    state.edges = (el, er);
    let grid = state.grid;
    let h = grid.spacing();
    let (lo, hi) = state.active;
    let mut new_hi = hi;
    while new_hi > lo && grid.node(new_hi) > er + 1e-9 * h {
        new_hi -= 1;
    }
    let mut new_lo = lo;
    while new_lo < new_hi && grid.node(new_lo) < el - 1e-9 * h {
        new_lo += 1;
    }
    if let Some(b) = budget {
        if new_hi < hi {
            b.dropped += weighted_momentum(cfg.equation, &grid, &state.p, &state.q, new_hi, hi)?;
        }
        if new_lo > lo {
            b.dropped += weighted_momentum(cfg.equation, &grid, &state.p, &state.q, lo, new_lo)?;
        }
    }
    state.active = (new_lo, new_hi);
    Ok(())
}

/// One RK4 step with the configured boundary treatment.
pub fn step(state: &mut EvolutionState, cfg: &EvolutionConfig) -> Result<StepOutcome> {
    cfg.validate()?;
    advance(state, cfg, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub sup_q: f64,
    /// `q(t, 0)` for Born-Infeld; `u_rr(t, 0)` for the membrane.
    pub q_at_origin: Option<f64>,
    pub min_discriminant: f64,
    pub momentum_integral: Option<f64>,
    /// Active integral plus dropped pieces minus integrated edge flux
    /// (`r`-weighted for the membrane).
    pub momentum_corrected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl Snapshot {
    pub fn of(state: &EvolutionState) -> Self {
        let (lo, hi) = state.active;
        Snapshot {
            t: state.t,
            x: (lo..=hi).map(|i| state.grid.node(i)).collect(),
            u: state.u[lo..=hi].to_vec(),
            p: state.p[lo..=hi].to_vec(),
            q: state.q[lo..=hi].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRun {
    pub diagnostics: Vec<DiagnosticRow>,
    pub final_state: EvolutionState,
    pub stop: StopReason,
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
    /// `int |w p / S|` at the start, used to normalise momentum drift.
    pub momentum_scale: f64,
}

fn origin_value(eq: Equation, s: &EvolutionState) -> Option<f64> {
    match eq {
        Equation::BornInfeld => s.origin_index().map(|i| s.q[i]),
        Equation::RadialMembrane => (s.active.0 == 0).then(|| s.q[1] / s.grid.spacing()),
    }
}

fn diagnostic_row(eq: Equation, s: &EvolutionState, budget: &MomentumBudget) -> DiagnosticRow {
    let (lo, hi) = s.active;
    let corrected = weighted_momentum(eq, &s.grid, &s.p, &s.q, lo, hi)
        .ok()
        .map(|m| m + budget.dropped - budget.flux);
    DiagnosticRow {
        t: s.t,
        sup_q: s.sup_q(),
        q_at_origin: origin_value(eq, s),
        min_discriminant: s.min_discriminant,
        momentum_integral: momentum_integral(s).ok(),
        momentum_corrected: corrected,
    }
}

/// Steps until a stop condition and records one diagnostic row per step.
pub fn evolve(initial: EvolutionState, cfg: &EvolutionConfig) -> Result<EvolutionRun> {
    cfg.validate()?;
    if cfg.equation == Equation::RadialMembrane && initial.grid.lo() != 0.0 {
        return Err(LabError::invalid(
            "membrane grid must start at the axis r = 0",
        ));
    }
    let mut state = initial;
    if cfg.equation == Equation::RadialMembrane {
        state.q[0] = 0.0;
    }
    let mut budget = MomentumBudget::default();
    let (lo, hi) = state.active;
    let momentum_scale = (lo..=hi)
        .map(|i| {
            momentum_density(state.p[i], state.q[i])
                .map(|m| (weight(cfg.equation, state.grid.node(i)) * m).abs())
                .unwrap_or(0.0)
        })
        .sum::<f64>()
        * state.grid.spacing();
    let mut diagnostics = vec![diagnostic_row(cfg.equation, &state, &budget)];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every > 0 {
        snapshots.push(Snapshot::of(&state));
    }
    let mut steps = 0;
    let stop = loop {
        if steps >= cfg.max_steps {
            break StopReason::MaxSteps;
        }
        match advance(&mut state, cfg, Some(&mut budget))? {
            StepOutcome::Stopped(r) => break r,
            StepOutcome::Advanced { .. } => {
                steps += 1;
                diagnostics.push(diagnostic_row(cfg.equation, &state, &budget));
                if cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0 {
                    snapshots.push(Snapshot::of(&state));
                }
            }
        }
    };
    Ok(EvolutionRun {
        diagnostics,
        final_state: state,
        stop,
        steps,
        snapshots,
        momentum_scale,
    })
}

impl EvolutionRun {
    /// `max_t |M_c(t) - M_c(0)| / max(|M_c(0)|, int |w p / S|)`.
    pub fn momentum_drift(&self) -> Option<f64> {
        let m0 = self.diagnostics.first()?.momentum_corrected?;
        let scale = m0.abs().max(self.momentum_scale);
        if scale == 0.0 {
            return Some(0.0);
        }
        self.diagnostics
            .iter()
            .map(|r| r.momentum_corrected.map(|m| (m - m0).abs() / scale))
            .try_fold(0.0, |acc: f64, d| d.map(|d| acc.max(d)))
    }

    /// `(t, |q(t, 0)|)` for every row that has an origin value.
    pub fn origin_series(&self) -> (Vec<f64>, Vec<f64>) {
        self.diagnostics
            .iter()
            .filter_map(|r| r.q_at_origin.map(|g| (r.t, g.abs())))
            .unzip()
    }

    /// `sup |u - u_exact|` over the active nodes of the final state.
    pub fn error_against(&self, sol: &ClosedFormSolution) -> Result<f64> {
        let s = &self.final_state;
        let mut e: f64 = 0.0;
        for i in s.active.0..=s.active.1 {
            e = e.max((s.u[i] - sol.value((s.t, s.grid.node(i)))?).abs());
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub fitted_exponent: f64,
    pub fitted_amplitude: f64,
    pub fit: FitResult,
    pub window: (f64, f64),
}

/// Log-log fit of `g` against `1 / (T - t)` over `t` in `window`.
pub fn fit_blowup_rate(
    times: &[f64],
    g: &[f64],
    blowup_time: f64,
    window: (f64, f64),
) -> Result<BlowupFit> {
    if times.len() != g.len() {
        return Err(LabError::invalid("times and values differ in length"));
    }
    let (lo, hi) = window;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (t, v) in times.iter().zip(g) {
        if *t >= lo && *t <= hi {
            if *t >= blowup_time {
                return Err(LabError::domain(format!(
                    "sample t = {t} is not before T = {blowup_time}"
                )));
            }
            a.push(1.0 / (blowup_time - t));
            b.push(*v);
        }
    }
    if a.len() < 2 {
        return Err(LabError::Arity {
            needed: 2,
            got: a.len(),
        });
    }
    let fit = log_log_fit(&a, &b)?;
    Ok(BlowupFit {
        fitted_exponent: fit.slope,
        fitted_amplitude: fit.intercept.exp(),
        fit,
        window,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

/// CSV: `t,sup_q,q_at_origin,min_discriminant,momentum_integral,momentum_corrected`.
pub fn write_diagnostics_csv<W: Write>(rows: &[DiagnosticRow], mut w: W) -> Result<()> {
    writeln!(
        w,
        "t,sup_q,q_at_origin,min_discriminant,momentum_integral,momentum_corrected"
    )?;
    for r in rows {
        writeln!(
            w,
            "{:.17e},{:.17e},{},{:.17e},{},{}",
            r.t,
            r.sup_q,
            cell(r.q_at_origin),
            r.min_discriminant,
            cell(r.momentum_integral),
            cell(r.momentum_corrected)
        )?;
    }
    Ok(())
}

/// CSV: `x,u,p,q`.
pub fn write_snapshot_csv<W: Write>(s: &Snapshot, mut w: W) -> Result<()> {
    writeln!(w, "x,u,p,q")?;
    for i in 0..s.x.len() {
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e}",
            s.x[i], s.u[i], s.p[i], s.q[i]
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundDiagnostic {
    pub family: Family,
    /// Discrete radial-membrane residual of the sampled exact solution.
    pub residual: ResidualReport,
    pub max_abs_eikonal: f64,
    pub min_discriminant: f64,
}

/// Exact lightlike backgrounds cannot be time-stepped; this samples the
/// closed form on `grid` at `n_levels` times from `t0` and checks it instead.
pub fn exact_background_diagnostic(
    sol: &ClosedFormSolution,
    grid: Grid1D,
    t0: f64,
    dt: f64,
    n_levels: usize,
) -> Result<BackgroundDiagnostic> {
    if !sol.family().is_membrane() && sol.family() != Family::ConstantProfile {
        return Err(LabError::invalid(
            "background diagnostic is for membrane families",
        ));
    }
    if n_levels < 3 {
        return Err(LabError::Arity {
            needed: 3,
            got: n_levels,
        });
    }
    let mut levels = Vec::with_capacity(n_levels);
    let mut max_eik: f64 = 0.0;
    let mut min_disc = f64::INFINITY;
    for l in 0..n_levels {
        let t = t0 + l as f64 * dt;
        let mut row = Vec::with_capacity(grid.len());
        for x in grid.nodes() {
            let j = sol.evaluate_jet((t, x))?;
            let d = discriminant(j.da, j.db);
            max_eik = max_eik.max(d.abs());
            min_disc = min_disc.min(d);
            row.push(j.value);
        }
        levels.push(row);
    }
    let field = SampledField2::new(grid, t0, dt, levels)?;
    let mut b = ReportBuilder::new(
        format!("{}-discrete", EquationId::RadialMembrane.label()),
        false,
    );
    for l in 1..n_levels - 1 {
        for i in 1..grid.len() - 1 {
            if grid.node(i) <= 0.0 {
                continue;
            }
            let r = discrete_residual(EquationId::RadialMembrane, &field, i, l)?;
            b.push((field.time(l), grid.node(i)), r);
        }
    }
    Ok(BackgroundDiagnostic {
        family: sol.family(),
        residual: b.finish(),
        max_abs_eikonal: max_eik,
        min_discriminant: min_disc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi_config(t_end: f64) -> EvolutionConfig {
        let mut c = EvolutionConfig::new(Equation::BornInfeld, t_end);
        c.dissipation = 0.0;
        c
    }

    #[test]
    fn speeds() {
        assert_eq!(characteristic_speeds(0.0, 0.0), (-1.0, 1.0));
        // u = f(x - t) travels at exactly unit speed
        let (_, plus) = characteristic_speeds(-0.7, 0.7);
        assert!((plus - 1.0).abs() < 1e-15);
        for &(p, q) in &[(0.5, 0.3), (-0.9, 4.0), (0.99, 0.0)] {
            let (a, b) = characteristic_speeds(p, q);
            assert!(a.abs() <= 1.0 + 1e-15 && b.abs() <= 1.0 + 1e-15 && a <= b);
        }
    }

    #[test]
    fn flat_state_has_zero_rates() {
        let g = Grid1D::new(-1.0, 1.0, 40).unwrap();
        let s = EvolutionState::zero(g, 0.0);
        let r = rhs(Equation::BornInfeld, &s, 0.01).unwrap();
        assert!(r.u.iter().chain(&r.p).chain(&r.q).all(|v| *v == 0.0));
        let mut s2 = s.clone();
        let c = bi_config(1.0);
        match step(&mut s2, &c).unwrap() {
            StepOutcome::Advanced { dt } => assert!((dt - 0.5 * g.spacing()).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(s2.u.iter().chain(&s2.p).chain(&s2.q).all(|v| *v == 0.0));
    }

    #[test]
    fn linear_wave_rates_vanish() {
        let eps = 1e-3;
        let g = Grid1D::new(-1.0, 1.0, 40).unwrap();
        let s = EvolutionState::from_fn(g, 0.0, |x| (eps * x, -eps, eps)).unwrap();
        let r = rhs(Equation::BornInfeld, &s, 0.0).unwrap();
        assert!(r.p.iter().chain(&r.q).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rhs_matches_closed_form_acceleration() {
        let sol = ClosedFormSolution::born_infeld(0.2, 1.0).unwrap();
        let err = |n: usize| {
            let g = Grid1D::new(-0.5, 0.5, n).unwrap();
            let s = EvolutionState::from_closed_form(&sol, g, 0.0).unwrap();
            let r = rhs(Equation::BornInfeld, &s, 0.0).unwrap();
            (1..n)
                .map(|i| (r.p[i] - sol.evaluate_jet((0.0, g.node(i))).unwrap().daa).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(100), err(200));
        assert!(e2 < 1e-3 && (e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid1D::new(-0.5, 0.5, 50).unwrap();
        let run = evolve(EvolutionState::zero(g, 0.0), &bi_config(0.2)).unwrap();
        let s = &run.final_state;
        assert!(s.u.iter().chain(&s.p).chain(&s.q).all(|v| *v == 0.0));
        assert!(run.steps > 0);
    }

    #[test]
    fn constant_profile_membrane_is_linear_in_time() {
        let sol = ClosedFormSolution::new(Family::ConstantProfile, 1.0, 0.3).unwrap();
        let g = Grid1D::new(0.0, 0.5, 50).unwrap();
        let s = EvolutionState::from_closed_form(&sol, g, 0.0).unwrap();
        let mut c = EvolutionConfig::new(Equation::RadialMembrane, 0.4);
        c.dissipation = 0.01;
        let run = evolve(s, &c).unwrap();
        assert_eq!(run.stop, StopReason::ReachedEnd);
        let f = &run.final_state;
        for i in f.active.0..=f.active.1 {
            assert!((f.u[i] - 0.3 * (1.0 - f.t)).abs() <= 1e-10);
            assert!(
                (f.p[i] + 0.3).abs() <= 1e-12 && f.q[i].abs() <= 1e-12,
                "{} {}",
                f.p[i],
                f.q[i]
            );
        }
    }

    #[test]
    fn exact_sphere_refuses_to_step() {
        let sol = ClosedFormSolution::sphere(true, 1.0).unwrap();
        let g = Grid1D::new(0.0, 0.5, 50).unwrap();
        let s = EvolutionState::from_closed_form(&sol, g, 0.0).unwrap();
        assert!(s.min_discriminant <= 1e-10);
        let run = evolve(s, &EvolutionConfig::new(Equation::RadialMembrane, 0.5)).unwrap();
        assert_eq!(run.stop, StopReason::DegeneracyFloor);
        assert_eq!(run.steps, 0);
        let d = exact_background_diagnostic(&sol, g, 0.0, 1e-3, 5).unwrap();
        assert!(d.max_abs_eikonal <= 1e-12 && d.min_discriminant <= 1e-10);
        assert!(d.residual.max_abs < 1e-2);
    }

    #[test]
    fn perturbed_sphere_stops_at_floor_or_runs_finite() {
        let sol = ClosedFormSolution::sphere(true, 1.0).unwrap();
        let g = Grid1D::new(0.0, 0.5, 100).unwrap();
        let eps = 1e-2;
        let s = EvolutionState::from_fn(g, 0.0, |r| {
            let j = sol.evaluate_jet((0.0, r)).unwrap();
            let b = (-(r / 0.1).powi(2)).exp();
            (j.value + eps * b, j.da, j.db - eps * 2.0 * r / 0.01 * b)
        })
        .unwrap();
        let run = evolve(s, &EvolutionConfig::new(Equation::RadialMembrane, 0.5)).unwrap();
        let f = &run.final_state;
        assert!(f.u.iter().all(|v| v.is_finite()));
        assert!(matches!(
            run.stop,
            StopReason::DegeneracyFloor | StopReason::ReachedEnd | StopReason::DomainExhausted
        ));
    }

    #[test]
    fn symmetric_data_stays_symmetric() {
        let sol = ClosedFormSolution::born_infeld(0.2, 1.0).unwrap();
        let g = Grid1D::new(-0.5, 0.5, 100).unwrap();
        let s0 = EvolutionState::from_closed_form(&sol, g, 0.0).unwrap();
        // even data: u(x) -> u(x) + u(-x)
        let s = EvolutionState::from_fn(g, 0.0, |x| {
            let i = g.nearest(x);
            let j = g.len() - 1 - i;
            (s0.u[i] + s0.u[j], s0.p[i] + s0.p[j], s0.q[i] - s0.q[j])
        })
        .unwrap();
        let mut c = bi_config(0.3);
        c.dissipation = 0.01;
        let run = evolve(s, &c).unwrap();
        let f = &run.final_state;
        let n = g.len() - 1;
        assert_eq!(f.active.0 + f.active.1, n);
        for i in f.active.0..=f.active.1 {
            assert!((f.u[i] - f.u[n - i]).abs() <= 1e-10);
            assert!((f.q[i] + f.q[n - i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn membrane_axis_stays_regular() {
        let g = Grid1D::new(0.0, 1.0, 100).unwrap();
        let s = EvolutionState::from_fn(g, 0.0, |r| {
            let b = 0.1 * (-(r / 0.2).powi(2)).exp();
            (b, 0.0, -2.0 * r / 0.04 * b)
        })
        .unwrap();
        let run = evolve(s, &EvolutionConfig::new(Equation::RadialMembrane, 0.3)).unwrap();
        assert_eq!(run.stop, StopReason::ReachedEnd);
        assert_eq!(run.final_state.q[0], 0.0);
        assert_eq!(run.final_state.active.0, 0);
    }

    #[test]
    fn born_infeld_self_consistency() {
        let sol = ClosedFormSolution::born_infeld(0.2, 1.0).unwrap();
        let g = Grid1D::new(-0.5, 0.5, 200).unwrap();
        let run = evolve(
            EvolutionState::from_closed_form(&sol, g, 0.0).unwrap(),
            &bi_config(0.5),
        )
        .unwrap();
        assert_eq!(run.stop, StopReason::ReachedEnd);
        let e = run.error_against(&sol).unwrap();
        assert!(e < 1e-3, "{e}");
    }

    #[test]
    fn excision_converges_at_second_order() {
        let sol = ClosedFormSolution::born_infeld(0.2, 1.0).unwrap();
        let err = |n: usize| {
            let g = Grid1D::new(-0.5, 0.5, n).unwrap();
            let run = evolve(
                EvolutionState::from_closed_form(&sol, g, 0.0).unwrap(),
                &bi_config(0.3),
            )
            .unwrap();
            assert_eq!(run.stop, StopReason::ReachedEnd);
            run.error_against(&sol).unwrap()
        };
        let order = (err(200) / err(400)).log2();
        assert!((order - 2.0).abs() < 0.3, "order {order}");
    }

    #[test]
    fn synthetic_blowup_fit() {
        let ts: Vec<f64> = (0..100).map(|i| 0.5 + 0.0045 * i as f64).collect();
        let gs: Vec<f64> = ts.iter().map(|t| 0.4 / (1.0 - t)).collect();
        let f = fit_blowup_rate(&ts, &gs, 1.0, (0.5, 0.95)).unwrap();
        assert!((f.fitted_exponent - 1.0).abs() <= 1e-10);
        assert!((f.fitted_amplitude - 0.4).abs() <= 1e-10);
        assert!(matches!(
            fit_blowup_rate(&ts, &gs, 1.0, (2.0, 3.0)),
            Err(LabError::Arity { .. })
        ));
    }

    #[test]
    fn csv_shapes() {
        let g = Grid1D::new(-0.5, 0.5, 20).unwrap();
        let mut c = bi_config(0.05);
        c.snapshot_every = 1;
        let run = evolve(EvolutionState::zero(g, 0.0), &c).unwrap();
        let mut buf = Vec::new();
        write_diagnostics_csv(&run.diagnostics, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cols: Vec<usize> = text.lines().map(|l| l.split(',').count()).collect();
        assert!(cols.iter().all(|c| *c == 6));
        let mut buf = Vec::new();
        write_snapshot_csv(&run.snapshots[1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,u,p,q\n"));
    }

    #[test]
    fn config_validation() {
        let mut c = bi_config(1.0);
        c.cfl_safety = 1.5;
        assert!(c.validate().is_err());
        let mut c = bi_config(1.0);
        c.boundary = BoundaryTreatment::ExactData {
            solution: ClosedFormSolution::sphere(true, 1.0).unwrap(),
        };
        assert!(c.validate().is_err());
    }
}
