//! Adaptive initial-value integration with dense output and event location.
//!
//! Two single-step schemes share one driver:
//!
//! * [`Method::Explicit`]: Dormand-Prince 5(4) with its fourth-order
//!   continuous extension.
//! * [`Method::Implicit`]: the six-stage, stiffly accurate, L-stable
//!   Rosenbrock method RODAS4 (order 4, embedded order 3, third-order dense
//!   output). It needs [`OdeSystem::jacobian`].
//!
//! Step control is component-wise: a step is accepted when
//! `max_i |err_i| / (abs_tol + rel_tol * max(|y_i|, |y_new_i|)) <= 1`.
//! The step-size update is a PI controller
//! `h_new = h * clamp(0.9 * err^(-0.7/q) * err_prev^(0.4/q), 0.2, 5)`
//! with `q = 5` (explicit) or `q = 4` (implicit); after a rejection the
//! factor is additionally capped at 1.

mod dopri5;
mod rodas;
mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{BandLu, BandMatrix, DenseLu, DenseMatrix};

pub use dopri5::Dopri5;
pub use trajectory::{Interpolant, Segment, Stats, Trajectory};

/// Location tolerance on the event predicate.
pub const EVENT_TOL: f64 = 1e-10;

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
    /// Analytic Jacobian `df/dy`; required by [`Method::Implicit`].
    fn jacobian(&self, _t: f64, _y: &[f64]) -> Option<Jacobian> {
        None
    }
}

/// Adapter turning closures into an [`OdeSystem`].
pub struct FnSystem<F, J = fn(f64, &[f64]) -> Option<Jacobian>> {
    dim: usize,
    f: F,
    jac: Option<J>,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        FnSystem { dim, f, jac: None }
    }
}

impl<F, J> FnSystem<F, J>
where
    F: Fn(f64, &[f64], &mut [f64]),
    J: Fn(f64, &[f64]) -> Option<Jacobian>,
{
    pub fn with_jacobian(dim: usize, f: F, jac: J) -> Self {
        FnSystem { dim, f, jac: Some(jac) }
    }
}

impl<F, J> OdeSystem for FnSystem<F, J>
where
    F: Fn(f64, &[f64], &mut [f64]),
    J: Fn(f64, &[f64]) -> Option<Jacobian>,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.f)(t, y, dydt)
    }
    fn jacobian(&self, t: f64, y: &[f64]) -> Option<Jacobian> {
        self.jac.as_ref().and_then(|j| j(t, y))
    }
}

#[derive(Debug, Clone)]
pub enum Jacobian {
    Dense(DenseMatrix),
    Banded(BandMatrix),
}

impl Jacobian {
    pub fn dense_from_rows<const N: usize>(rows: &[[f64; N]; N]) -> Self {
        let mut m = DenseMatrix::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Jacobian::Dense(m)
    }

    pub fn dim(&self) -> usize {
        match self {
            Jacobian::Dense(m) => m.dim(),
            Jacobian::Banded(m) => m.dim(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Jacobian::Dense(m) => m.get(i, j),
            Jacobian::Banded(m) => m.get(i, j),
        }
    }

    fn shifted_lu(&self, scale: f64) -> Option<Factor> {
        match self {
            Jacobian::Dense(m) => m.shifted_lu(scale).map(Factor::Dense),
            Jacobian::Banded(m) => m.shifted_lu(scale).map(Factor::Band),
        }
    }
}

enum Factor {
    Dense(DenseLu),
    Band(BandLu),
}

impl Factor {
    fn solve(&self, b: &mut [f64]) {
        match self {
            Factor::Dense(f) => f.solve(b),
            Factor::Band(f) => f.solve(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Initial step; chosen automatically when absent.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            h_init: None,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            method: Method::Explicit,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorConfig {
            abs_tol: tol,
            rel_tol: tol,
            ..Default::default()
        }
    }

    pub fn implicit(mut self) -> Self {
        self.method = Method::Implicit;
        self
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |what: &str| Err(IntegrateError::InvalidConfig(what.to_string()));
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_max) {
            return bad("need 0 < h_min <= h_max");
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0 && h.is_finite()) {
                return bad("h_init must be positive and finite");
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid interval: need finite t0 < tf (got {t0} .. {tf})")]
    InvalidInterval { t0: f64, tf: f64 },
    #[error("initial state has {len} entries, system dimension is {dim}")]
    DimensionMismatch { len: usize, dim: usize },
    #[error("non-finite initial state")]
    NonFiniteInitial,
    #[error("implicit method needs an analytic Jacobian")]
    MissingJacobian,
    #[error("step size {h:.3e} fell below h_min at t = {t} (stiffness or blow-up); last state {state:?}")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },
    #[error("exceeded max_steps = {steps} at t = {t}")]
    MaxSteps { t: f64, steps: usize },
    #[error("non-finite right-hand side at t = {t}")]
    NonFinite { t: f64 },
    #[error("singular iteration matrix at t = {t}")]
    Singular { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rising,
    Falling,
    #[default]
    Any,
}

/// A sign change of `predicate(t, y)` along the solution.
pub struct Event<'a> {
    pub predicate: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a> Event<'a> {
    pub fn new(predicate: impl Fn(f64, &[f64]) -> f64 + 'a, direction: Direction, terminal: bool) -> Self {
        Event {
            predicate: Box::new(predicate),
            direction,
            terminal,
        }
    }

    fn triggers(&self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self.direction {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Any => rising || falling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub event: usize,
    pub t: f64,
    pub state: Vec<f64>,
    /// Predicate value at the reported time.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub trajectory: Trajectory,
    pub events: Vec<EventRecord>,
    /// Set when a terminal event stopped the run.
    pub terminated_by: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum EventOutcome {
    Hit {
        t: f64,
        state: Vec<f64>,
        trajectory: Trajectory,
    },
    NoEvent {
        trajectory: Trajectory,
    },
}

/// Integrate `system` over `[t0, tf]`, recording every accepted step with
/// its dense-output interpolant.
pub fn integrate<S: OdeSystem + ?Sized>(
    system: &S,
    t0: f64,
    tf: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    events: &[Event<'_>],
) -> Result<Solution, IntegrateError> {
    let dim = system.dim();
    let mut traj = Trajectory::new(dim, t0, y0, cfg);
    let mut records = Vec::new();
    let (terminated_by, stats) = drive(system, t0, tf, y0, cfg, events, &mut records, |seg, y1| {
        traj.push(seg, y1)
    })?;
    traj.stats = stats;
    Ok(Solution {
        trajectory: traj,
        events: records,
        terminated_by,
    })
}

/// Integrate until the first crossing of `event` (treated as terminal).
pub fn integrate_to_event<S: OdeSystem + ?Sized>(
    system: &S,
    t0: f64,
    tf: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    event: Event<'_>,
) -> Result<EventOutcome, IntegrateError> {
    let event = Event {
        terminal: true,
        ..event
    };
    let sol = integrate(system, t0, tf, y0, cfg, std::slice::from_ref(&event))?;
    Ok(match sol.events.into_iter().next() {
        Some(rec) => EventOutcome::Hit {
            t: rec.t,
            state: rec.state,
            trajectory: sol.trajectory,
        },
        None => EventOutcome::NoEvent {
            trajectory: sol.trajectory,
        },
    })
}

/// Integrate and return the solution only at the requested (increasing)
/// output times, without retaining the step history.
pub fn integrate_sampled<S: OdeSystem + ?Sized>(
    system: &S,
    times: &[f64],
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<Vec<f64>>, Stats), IntegrateError> {
    assert!(times.len() >= 2, "need at least two output times");
    let dim = system.dim();
    let mut out = Vec::with_capacity(times.len());
    out.push(y0.to_vec());
    let mut next = 1;
    let mut records = Vec::new();
    let mut buf = vec![0.0; dim];
    let (_, stats) = drive(
        system,
        times[0],
        times[times.len() - 1],
        y0,
        cfg,
        &[],
        &mut records,
        |seg, y1| {
            while next < times.len() && times[next] <= seg.t_end {
                if times[next] == seg.t_end {
                    out.push(y1.to_vec());
                } else {
                    seg.eval(times[next], &mut buf);
                    out.push(buf.clone());
                }
                next += 1;
            }
        },
    )?;
    Ok((out, stats))
}

pub(crate) trait Stepper {
    /// Exponent base of the error estimate (local order + 1).
    fn error_order(&self) -> f64;
    fn init(&mut self, sys: &dyn DynSystem, t: f64, y: &[f64]) -> Result<(), IntegrateError>;
    /// Derivative at the current (accepted) point.
    fn f0(&self) -> &[f64];
    /// Try a step of size `h`; returns the scaled error norm (infinite when
    /// a stage produced non-finite values).
    fn attempt(
        &mut self,
        sys: &dyn DynSystem,
        t: f64,
        y: &[f64],
        h: f64,
        cfg: &IntegratorConfig,
    ) -> Result<f64, IntegrateError>;
    fn proposal(&self) -> &[f64];
    /// Accept the last attempt and return its interpolant.
    fn commit(&mut self, t: f64, y: &[f64], h: f64) -> Interpolant;
    fn counters(&self) -> (usize, usize, usize);
}

/// Object-safe view used by the steppers.
pub(crate) trait DynSystem {
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
    fn jacobian(&self, t: f64, y: &[f64]) -> Option<Jacobian>;
}

impl<S: OdeSystem + ?Sized> DynSystem for S {
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        OdeSystem::rhs(self, t, y, dydt)
    }
    fn jacobian(&self, t: f64, y: &[f64]) -> Option<Jacobian> {
        OdeSystem::jacobian(self, t, y)
    }
}

struct ByRef<'a, S: ?Sized>(&'a S);

impl<S: OdeSystem + ?Sized> OdeSystem for ByRef<'_, S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        self.0.rhs(t, y, dydt)
    }
    fn jacobian(&self, t: f64, y: &[f64]) -> Option<Jacobian> {
        self.0.jacobian(t, y)
    }
}

pub(crate) fn scaled_error(err: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..err.len() {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i].abs() / sc;
        if !r.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(r);
    }
    worst
}

fn initial_step(sys: &dyn DynSystem, t0: f64, y0: &[f64], f0: &[f64], order: f64, cfg: &IntegratorConfig) -> f64 {
    let n = y0.len();
    let norm = |v: &[f64]| {
        (0..n)
            .map(|i| v[i].abs() / (cfg.abs_tol + cfg.rel_tol * y0[i].abs()))
            .fold(0.0, f64::max)
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.h_max);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = norm(&diff) / h0;
    if !d2.is_finite() {
        return h0 * 1e-3;
    }
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / order)
    };
    (100.0 * h0).min(h1)
}

/// Refine an event crossing on `[0, 1]` in the step's local coordinate.
fn locate(event: &Event<'_>, seg: &Segment, t1: f64, g_lo: f64, g_hi: f64, buf: &mut [f64]) -> (f64, f64) {
    let g = |t: f64, buf: &mut [f64]| {
        seg.eval(t, buf);
        (event.predicate)(t, buf)
    };
    let (mut a, mut b) = (seg.t_start, t1);
    let (mut ga, mut gb) = (g_lo, g_hi);
    if gb == 0.0 {
        return (b, 0.0);
    }
    // Illinois variant of regula falsi, with bisection safeguard
    let mut side = 0i8;
    let mut best = (b, gb);
    for _ in 0..200 {
        let width = b - a;
        if width <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mut c = b - gb * (b - a) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c, buf);
        if gc.abs() < best.1.abs() {
            best = (c, gc);
        }
        if gc.abs() <= EVENT_TOL {
            best = (c, gc);
            break;
        }
        if (gc > 0.0) == (gb > 0.0) {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn drive<S, K>(
    system: &S,
    t0: f64,
    tf: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    events: &[Event<'_>],
    records: &mut Vec<EventRecord>,
    mut sink: K,
) -> Result<(Option<usize>, Stats), IntegrateError>
where
    S: OdeSystem + ?Sized,
    K: FnMut(&Segment, &[f64]),
{
    cfg.validate()?;
    if !(t0.is_finite() && tf.is_finite() && tf > t0) {
        return Err(IntegrateError::InvalidInterval { t0, tf });
    }
    let dim = system.dim();
    if y0.len() != dim {
        return Err(IntegrateError::DimensionMismatch { len: y0.len(), dim });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(IntegrateError::NonFiniteInitial);
    }
    let mut stepper: Box<dyn Stepper> = match cfg.method {
        Method::Explicit => Box::new(Dopri5::new(dim)),
        Method::Implicit => {
            if system.jacobian(t0, y0).is_none() {
                return Err(IntegrateError::MissingJacobian);
            }
            Box::new(rodas::Rodas4::new(dim))
        }
    };
    let wrapped = ByRef(system);
    let sys: &dyn DynSystem = &wrapped;
    stepper.init(sys, t0, y0)?;
    let q = stepper.error_order();

    let mut h = match cfg.h_init {
        Some(h) => h,
        None => initial_step(sys, t0, y0, stepper.f0(), q, cfg),
    };
    h = h.clamp(cfg.h_min, cfg.h_max).min(tf - t0);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.predicate)(t0, y0)).collect();
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;
    let mut stats = Stats {
        method: cfg.method,
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
        ..Default::default()
    };
    let mut buf = vec![0.0; dim];
    let (alpha, beta) = (0.7 / q, 0.4 / q);

    while t < tf {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(IntegrateError::MaxSteps {
                t,
                steps: cfg.max_steps,
            });
        }
        let remaining = tf - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        let err = stepper.attempt(sys, t, &y, h, cfg)?;
        if err <= 1.0 {
            let t_new = if last { tf } else { t + h };
            let y_new = stepper.proposal().to_vec();
            let interp = stepper.commit(t, &y, h);
            let mut seg = Segment {
                t_start: t,
                t_end: t_new,
                h,
                interp,
            };
            stats.accepted += 1;

            // events: earliest crossing in this step wins
            let mut hit: Option<(usize, f64, f64)> = None;
            let g_new: Vec<f64> = events.iter().map(|e| (e.predicate)(t_new, &y_new)).collect();
            for (i, e) in events.iter().enumerate() {
                if e.triggers(g_prev[i], g_new[i]) {
                    let (te, ge) = locate(e, &seg, t_new, g_prev[i], g_new[i], &mut buf);
                    seg.eval(te, &mut buf);
                    records.push(EventRecord {
                        event: i,
                        t: te,
                        state: buf.clone(),
                        residual: ge,
                    });
                    if e.terminal && hit.is_none_or(|(_, th, _)| te < th) {
                        hit = Some((i, te, ge));
                    }
                }
            }
            if let Some((i, te, _)) = hit {
                // drop non-terminal records located after the terminal one
                records.retain(|r| r.t <= te);
                seg.eval(te, &mut buf);
                seg.t_end = te;
                sink(&seg, &buf);
                return Ok((Some(i), finish(stats, &*stepper)));
            }
            g_prev = g_new;
            sink(&seg, &y_new);
            t = t_new;
            y = y_new;

            let e = err.max(1e-10);
            let mut fac = 0.9 * e.powf(-alpha) * err_prev.powf(beta);
            fac = fac.clamp(0.2, 5.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            err_prev = e;
            rejected_last = false;
            h = (h * fac).min(cfg.h_max);
            if last {
                break;
            }
        } else {
            stats.rejected += 1;
            rejected_last = true;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-1.0 / q)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= fac;
        }
        if h < cfg.h_min || t + h == t {
            if !stepper.f0().iter().all(|v| v.is_finite()) {
                return Err(IntegrateError::NonFinite { t });
            }
            return Err(IntegrateError::StepUnderflow { t, h, state: y.clone() });
        }
    }
    Ok((None, finish(stats, &*stepper)))
}

fn finish(mut stats: Stats, stepper: &dyn Stepper) -> Stats {
    let (f, j, lu) = stepper.counters();
    stats.rhs_evals = f;
    stats.jacobian_evals = j;
    stats.factorizations = lu;
    stats
}

#[cfg(test)]
mod tests;
