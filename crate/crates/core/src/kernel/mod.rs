//! Fundamental solution `H = H1 - H2` of the linear part of the
//! reaction-diffusion system, and the Picard solver built on it.
//!
//! ```text
//! H1(x,t) = G(x,t) e^{-a t}
//!         - 1/2 int_0^t e^{-x^2/(4Dy) - a y} / sqrt(t-y)
//!                 * sqrt(eps) e^{-eta (t-y)} / sqrt(pi D)
//!                 * J1(2 sqrt(eps y (t-y))) dy
//! H2(x,t) = int_0^t H1(x,y) e^{-gamma (t-y)} sqrt(delta y/(t-y))
//!                 * J1(2 sqrt(delta y (t-y))) dy
//! ```
//!
//! with `G` the heat kernel, `eta = beta eps`, `gamma = delta d`. Both
//! integrals are taken in `y = t sin^2(theta)`, which removes the
//! `1/sqrt(t-y)` endpoint factor:
//!
//! ```text
//! H1 = G e^{-a t} - sqrt(eps t/(pi D)) int_0^{pi/2} sin(th)
//!        e^{-x^2/(4D t s2) - a t s2 - eta t c2} J1(2 sqrt(eps) t sin cos) dth
//! H2 = sqrt(delta) int_0^{pi/2} 2 t s2 H1(x, t s2) e^{-gamma t c2}
//!        J1(2 sqrt(delta) t sin cos) dth
//! ```
//!
//! where `s2 = sin^2(th)`, `c2 = cos^2(th)`. `H2` is read with the closing
//! parenthesis after the Bessel argument.

mod picard;
mod source;

use serde::Serialize;
use thiserror::Error;

use crate::bessel::j1;
use crate::field::FieldSet;
use crate::model::{FhrParams, ModelError};
use crate::quadrature::{integrate, QuadError};

pub use picard::{picard_solve, picard_solve_with, Extension, PicardGrid, PicardOptions};
pub use source::{source_f, SourceContext};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

/// Default panel budget for one adaptive integral.
pub const DEFAULT_BUDGET: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("kernel quadrature at (x = {x}, t = {t}): best {value:e} with error {error:.3e} > tolerance {tol:.3e} after {intervals} panels")]
    Accuracy {
        x: f64,
        t: f64,
        value: f64,
        error: f64,
        tol: f64,
        intervals: usize,
    },
    #[error("Picard sweeps diverge: update grew for 3 consecutive sweeps (last {last:.3e}); try a shorter horizon")]
    Divergence { last: f64, log: Vec<f64> },
    #[error("truncated domain too small: heat-kernel tail mass {mass:.3e} exceeds tolerance {tol:.3e}")]
    DomainSize { mass: f64, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub error: f64,
}

/// Damped heat kernel `exp(-x^2/(4Dt)) / (2 sqrt(pi D t)) * exp(-a t)`.
pub fn heat_kernel(x: f64, t: f64, diffusion: f64, a: f64) -> f64 {
    (-x * x / (4.0 * diffusion * t) - a * t).exp() / (2.0 * (std::f64::consts::PI * diffusion * t).sqrt())
}

fn check(x: f64, t: f64, p: &FhrParams, tol: f64) -> Result<(), KernelError> {
    p.validate()?;
    if !x.is_finite() {
        return Err(KernelError::Domain(format!("x must be finite (got {x})")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(KernelError::Domain(format!("t must be positive (got {t})")));
    }
    if !(p.diffusion > 0.0) {
        return Err(KernelError::Domain(format!("D must be positive (got {})", p.diffusion)));
    }
    if !(p.eps >= 0.0 && p.delta >= 0.0) {
        return Err(KernelError::Domain("eps and delta must be non-negative".into()));
    }
    if !(tol > 0.0) {
        return Err(KernelError::Domain("tolerance must be positive".into()));
    }
    Ok(())
}

fn quad_err(x: f64, t: f64, e: QuadError) -> KernelError {
    match e {
        QuadError::Accuracy {
            value,
            error,
            tol,
            intervals,
        } => KernelError::Accuracy {
            x,
            t,
            value,
            error,
            tol,
            intervals,
        },
        other => KernelError::Domain(other.to_string()),
    }
}

// integral part of H1, without range checks
fn h1_raw(x: f64, t: f64, p: &FhrParams, tol: f64, budget: usize) -> Result<KernelValue, KernelError> {
    let heat = heat_kernel(x, t, p.diffusion, p.a);
    if p.eps == 0.0 {
        return Ok(KernelValue {
            value: heat,
            error: 0.0,
        });
    }
    let se = p.eps.sqrt();
    let eta = p.eta();
    let pref = (p.eps * t / (std::f64::consts::PI * p.diffusion)).sqrt();
    let xx = x * x / (4.0 * p.diffusion * t);
    let integrand = |th: f64| {
        let (s, c) = th.sin_cos();
        let (s2, c2) = (s * s, c * c);
        if s2 == 0.0 {
            return 0.0;
        }
        let expo = -xx / s2 - p.a * t * s2 - eta * t * c2;
        s * expo.exp() * j1(2.0 * se * t * s * c)
    };
    // the integral is scaled by `pref`
    let q = integrate(integrand, 0.0, HALF_PI, tol / pref, budget).map_err(|e| match quad_err(x, t, e) {
        KernelError::Accuracy {
            value,
            error,
            intervals,
            ..
        } => KernelError::Accuracy {
            x,
            t,
            value: heat - pref * value,
            error: pref * error,
            tol,
            intervals,
        },
        other => other,
    })?;
    Ok(KernelValue {
        value: heat - pref * q.value,
        error: pref * q.error,
    })
}

/// `H1` by the composite trapezoid rule with `panels` panels in `theta`;
/// second order, for refinement studies.
pub fn h1_trapezoid(x: f64, t: f64, p: &FhrParams, panels: usize) -> Result<f64, KernelError> {
    check(x, t, p, 1.0)?;
    let heat = heat_kernel(x, t, p.diffusion, p.a);
    if p.eps == 0.0 || panels == 0 {
        return Ok(heat);
    }
    let se = p.eps.sqrt();
    let pref = (p.eps * t / (std::f64::consts::PI * p.diffusion)).sqrt();
    let xx = x * x / (4.0 * p.diffusion * t);
    let f = |th: f64| {
        let (s, c) = th.sin_cos();
        if s == 0.0 {
            return 0.0;
        }
        s * (-xx / (s * s) - p.a * t * s * s - p.eta() * t * c * c).exp() * j1(2.0 * se * t * s * c)
    };
    let h = HALF_PI / panels as f64;
    let mut acc = 0.5 * (f(0.0) + f(HALF_PI));
    for i in 1..panels {
        acc += f(i as f64 * h);
    }
    Ok(heat - pref * h * acc)
}

/// `H1(x, t)` with an error estimate at most `tol`.
pub fn h1(x: f64, t: f64, p: &FhrParams, tol: f64) -> Result<KernelValue, KernelError> {
    h1_with_budget(x, t, p, tol, DEFAULT_BUDGET)
}

pub fn h1_with_budget(x: f64, t: f64, p: &FhrParams, tol: f64, budget: usize) -> Result<KernelValue, KernelError> {
    check(x, t, p, tol)?;
    h1_raw(x, t, p, tol, budget)
}

/// `H2(x, t)` by nested adaptive quadrature.
pub fn h2(x: f64, t: f64, p: &FhrParams, tol: f64) -> Result<KernelValue, KernelError> {
    h2_with_budget(x, t, p, tol, DEFAULT_BUDGET)
}

pub fn h2_with_budget(x: f64, t: f64, p: &FhrParams, tol: f64, budget: usize) -> Result<KernelValue, KernelError> {
    check(x, t, p, tol)?;
    if p.delta == 0.0 {
        return Ok(KernelValue { value: 0.0, error: 0.0 });
    }
    let sd = p.delta.sqrt();
    let gamma = p.gamma();
    // |weight| <= sqrt(delta) 2t * sqrt(delta) t, integrated over pi/2
    let weight_mass = p.delta * t * t * std::f64::consts::PI;
    let inner_tol = 0.25 * tol / weight_mass.max(1e-300);
    let outer_tol = 0.5 * tol;
    let mut inner_err: f64 = 0.0;
    let mut failure = None;
    let integrand = |th: f64| {
        let (s, c) = th.sin_cos();
        let (s2, c2) = (s * s, c * c);
        let ty = t * s2;
        if ty <= 0.0 {
            return 0.0;
        }
        let w = 2.0 * t * s2 * (-gamma * t * c2).exp() * j1(2.0 * sd * t * s * c);
        if w == 0.0 {
            return 0.0;
        }
        match h1_raw(x, ty, p, inner_tol, budget) {
            Ok(v) => {
                inner_err = inner_err.max(v.error);
                sd * w * v.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let q = integrate(integrand, 0.0, HALF_PI, outer_tol, budget);
    if let Some(e) = failure {
        return Err(e);
    }
    let q = q.map_err(|e| quad_err(x, t, e))?;
    Ok(KernelValue {
        value: q.value,
        error: q.error + inner_err * weight_mass,
    })
}

/// `H = H1 - H2`.
pub fn h(x: f64, t: f64, p: &FhrParams, tol: f64) -> Result<KernelValue, KernelError> {
    h_with_budget(x, t, p, tol, DEFAULT_BUDGET)
}

pub fn h_with_budget(x: f64, t: f64, p: &FhrParams, tol: f64, budget: usize) -> Result<KernelValue, KernelError> {
    let a = h1_with_budget(x, t, p, 0.5 * tol, budget)?;
    let b = h2_with_budget(x, t, p, 0.5 * tol, budget)?;
    Ok(KernelValue {
        value: a.value - b.value,
        error: a.error + b.error,
    })
}

/// `H`, `H1`, `H2` sampled on a tensor grid, row-major in `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelField {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub h: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub error: Vec<f64>,
}

impl KernelField {
    pub fn compute(p: &FhrParams, xs: &[f64], ts: &[f64], tol: f64, budget: usize) -> Result<Self, KernelError> {
        let nodes: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ts.iter().map(move |&t| (x, t))).collect();
        let eval = |&(x, t): &(f64, f64)| -> Result<[f64; 4], KernelError> {
            let a = h1_with_budget(x, t, p, 0.5 * tol, budget)?;
            let b = h2_with_budget(x, t, p, 0.5 * tol, budget)?;
            Ok([a.value - b.value, a.value, b.value, a.error + b.error])
        };
        let vals = crate::par::map(&nodes, eval)?;
        Ok(KernelField {
            xs: xs.to_vec(),
            ts: ts.to_vec(),
            h: vals.iter().map(|v| v[0]).collect(),
            h1: vals.iter().map(|v| v[1]).collect(),
            h2: vals.iter().map(|v| v[2]).collect(),
            error: vals.iter().map(|v| v[3]).collect(),
        })
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ts.len() + j
    }

    /// Fields `H`, `H1`, `H2` and `error` for export.
    pub fn fields(&self) -> FieldSet {
        let mut set = FieldSet::new(self.xs.clone(), self.ts.clone());
        for (name, v) in [
            ("H", &self.h),
            ("H1", &self.h1),
            ("H2", &self.h2),
            ("error", &self.error),
        ] {
            set.fields.push((name.to_string(), v.clone()));
        }
        set
    }
}
