//! FitzHugh-Rinzel vector fields.
//!
//! Two cubic conventions appear in this crate and they only coincide for
//! `k = 1`:
//!
//! * the ODE form used for certificates, `-a u + u^2 (a + 1 - u/k)`;
//! * the reaction-diffusion form used by [`crate::pde`] and [`crate::kernel`],
//!   `k u^2 (a + 1 - u)` (the `-a u` term is kept separately).
//!
//! The classic three-variable model is the ODE form with `a = -1`, `k = 3`:
//!
//! ```text
//! du/dt = u - u^3/3 + I - w + y
//! dw/dt = eps (-beta w + c + u)
//! dy/dt = delta (-u + h - d y)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{Jacobian, OdeSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("first-integral precondition violated: {relation} (mismatch {mismatch:.3e})")]
    Constraint { relation: &'static str, mismatch: f64 },
    #[error("parameter {0} must be nonzero")]
    ZeroParameter(&'static str),
}

/// The model constants.
///
/// Derived rates `eta = beta * eps` and `gamma = delta * d` are always
/// recomputed through [`FhrParams::eta`] and [`FhrParams::gamma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct FhrParams {
    /// Diffusion coefficient, only read by the spatial solvers.
    #[serde(rename = "D")]
    pub diffusion: f64,
    /// Threshold / excitability constant.
    pub a: f64,
    /// External stimulus amplitude.
    #[serde(rename = "I")]
    pub current: f64,
    pub eps: f64,
    pub beta: f64,
    pub c: f64,
    pub d: f64,
    pub h: f64,
    pub delta: f64,
    /// Cubic-shape constant.
    pub k: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "D")]
    diffusion: f64,
    a: f64,
    #[serde(rename = "I")]
    current: f64,
    eps: f64,
    beta: f64,
    c: f64,
    d: f64,
    h: f64,
    delta: f64,
    k: f64,
}

impl TryFrom<RawParams> for FhrParams {
    type Error = ModelError;

    fn try_from(r: RawParams) -> Result<Self, Self::Error> {
        let p = FhrParams {
            diffusion: r.diffusion,
            a: r.a,
            current: r.current,
            eps: r.eps,
            beta: r.beta,
            c: r.c,
            d: r.d,
            h: r.h,
            delta: r.delta,
            k: r.k,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Keys accepted by the parameter schema, in serialization order.
pub const PARAM_KEYS: [&str; 10] = ["D", "a", "I", "eps", "beta", "c", "d", "h", "delta", "k"];

impl FhrParams {
    /// The worked example parameter set: `I = 0.3125, eps = 0.8, c = 0.2,
    /// h = -0.775, beta = 0.126, delta = 0.5, d = 1, k = 3`, with `a` and `D`
    /// supplied by the caller.
    pub fn reference_set(a: f64, diffusion: f64) -> Self {
        FhrParams {
            diffusion,
            a,
            current: 0.3125,
            eps: 0.8,
            beta: 0.126,
            c: 0.2,
            d: 1.0,
            h: -0.775,
            delta: 0.5,
            k: 3.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in PARAM_KEYS.iter().zip(self.values()) {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(name));
            }
        }
        Ok(())
    }

    /// Values in [`PARAM_KEYS`] order.
    pub fn values(&self) -> [f64; 10] {
        [
            self.diffusion,
            self.a,
            self.current,
            self.eps,
            self.beta,
            self.c,
            self.d,
            self.h,
            self.delta,
            self.k,
        ]
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        PARAM_KEYS.iter().position(|k| *k == key).map(|i| self.values()[i])
    }

    /// Returns a copy with one key replaced; unknown keys are rejected.
    pub fn with(&self, key: &str, value: f64) -> Option<Self> {
        let mut p = *self;
        let slot = match key {
            "D" => &mut p.diffusion,
            "a" => &mut p.a,
            "I" => &mut p.current,
            "eps" => &mut p.eps,
            "beta" => &mut p.beta,
            "c" => &mut p.c,
            "d" => &mut p.d,
            "h" => &mut p.h,
            "delta" => &mut p.delta,
            "k" => &mut p.k,
            _ => return None,
        };
        *slot = value;
        Some(p)
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.beta * self.eps
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.delta * self.d
    }

    #[inline]
    pub(crate) fn rhs_unchecked(&self, s: State) -> State {
        let State { u, w, y } = s;
        State {
            u: -self.a * u + u * u * (self.a + 1.0 - u / self.k) - w + y + self.current,
            w: self.eps * (-self.beta * w + self.c + u),
            y: self.delta * (-u + self.h - self.d * y),
        }
    }

    #[inline]
    pub(crate) fn rhs_classic_unchecked(&self, s: State) -> State {
        let State { u, w, y } = s;
        State {
            u: u - u * u * u / 3.0 + self.current - w + y,
            w: self.eps * (-self.beta * w + self.c + u),
            y: self.delta * (-u + self.h - self.d * y),
        }
    }

    #[inline]
    pub(crate) fn jacobian_unchecked(&self, s: State) -> [[f64; 3]; 3] {
        let u = s.u;
        [
            [-self.a + 2.0 * u * (self.a + 1.0) - 3.0 * u * u / self.k, -1.0, 1.0],
            [self.eps, -self.eps * self.beta, 0.0],
            [-self.delta, 0.0, -self.delta * self.d],
        ]
    }
}

/// A phase point: membrane potential `u`, recovery `w`, slow current `y`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub u: f64,
    pub w: f64,
    pub y: f64,
}

impl State {
    pub fn new(u: f64, w: f64, y: f64) -> Result<Self, ModelError> {
        let s = State { u, w, y };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.u.is_finite() && self.w.is_finite() && self.y.is_finite() {
            Ok(())
        } else {
            Err(ModelError::NonFinite("state"))
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u, self.w, self.y]
    }

    /// Panics if `v` has fewer than three entries.
    pub fn from_slice(v: &[f64]) -> Self {
        State {
            u: v[0],
            w: v[1],
            y: v[2],
        }
    }

    pub fn norm(&self) -> f64 {
        (2.0 * energy(*self)).sqrt()
    }
}

impl From<[f64; 3]> for State {
    fn from(v: [f64; 3]) -> Self {
        State {
            u: v[0],
            w: v[1],
            y: v[2],
        }
    }
}

fn check(p: &FhrParams, s: &State) -> Result<(), ModelError> {
    p.validate()?;
    s.validate()
}

/// Right-hand side of the general model with cubic `u^2 (a + 1 - u/k)`.
pub fn rhs_general(p: &FhrParams, s: State) -> Result<State, ModelError> {
    check(p, &s)?;
    Ok(p.rhs_unchecked(s))
}

/// Right-hand side of the classic model `du/dt = u - u^3/3 + I - w + y`.
/// `a` and `k` are ignored.
pub fn rhs_classic(p: &FhrParams, s: State) -> Result<State, ModelError> {
    check(p, &s)?;
    Ok(p.rhs_classic_unchecked(s))
}

/// Analytic Jacobian of [`rhs_general`], row-major.
pub fn jacobian(p: &FhrParams, s: State) -> Result<[[f64; 3]; 3], ModelError> {
    check(p, &s)?;
    Ok(p.jacobian_unchecked(s))
}

/// `E = (u^2 + w^2 + y^2) / 2`.
#[inline]
pub fn energy(s: State) -> f64 {
    0.5 * (s.u * s.u + s.w * s.w + s.y * s.y)
}

/// Exact time derivative of [`energy`] along [`rhs_general`].
pub fn energy_rate(p: &FhrParams, s: State) -> Result<f64, ModelError> {
    check(p, &s)?;
    Ok(energy_rate_unchecked(p, s))
}

#[inline]
pub(crate) fn energy_rate_unchecked(p: &FhrParams, s: State) -> f64 {
    let ds = p.rhs_unchecked(s);
    s.u * ds.u + s.w * ds.w + s.y * ds.y
}

/// Scalar reduction `du/dt = u - u^3/3 + q1 + q2 exp(-beta eps t)` obtained
/// from the first integral of the classic model.
#[inline]
pub fn reduced_rhs(p: &FhrParams, q1: f64, q2: f64, t: f64, u: f64) -> f64 {
    u - u * u * u / 3.0 + q1 + q2 * (-p.eta() * t).exp()
}

/// Relative tolerance used when checking `eps beta = delta d` and
/// `eps = -delta`.
pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-12;

/// Offsets of the first integral.
///
/// Along the classic model, `q(t) = I - w(t) + y(t)` obeys
/// `dq/dt = -eps beta (q - q1)` whenever `eps beta = delta d` and
/// `eps = -delta`, so `q(t) = q1 + q2 exp(-eps beta t)` and
/// `du/dt + u^3/3 - u = q1 + q2 exp(-eps beta t)`.
///
/// Derivation: `dq/dt = eps beta w - delta d y - (eps + delta) u - eps c + delta h`.
/// The `u` term vanishes for `eps = -delta`; with `lambda = eps beta = delta d`
/// the rest is `-lambda (q - I) - eps (c + h)`, hence `q1 = I - (c + h)/beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegral {
    pub q1: f64,
    pub q2: f64,
    /// Decay rate `eps beta`.
    pub rate: f64,
}

impl FirstIntegral {
    pub fn forcing(&self, t: f64) -> f64 {
        self.q1 + self.q2 * (-self.rate * t).exp()
    }
}

pub fn first_integral_offsets(p: &FhrParams, s0: State, rel_tol: f64) -> Result<FirstIntegral, ModelError> {
    check(p, &s0)?;
    let rel = |x: f64, y: f64| {
        let scale = x.abs().max(y.abs());
        if scale == 0.0 {
            0.0
        } else {
            (x - y).abs() / scale
        }
    };
    let m1 = rel(p.eta(), p.gamma());
    if m1 > rel_tol {
        return Err(ModelError::Constraint {
            relation: "eps*beta = delta*d",
            mismatch: m1,
        });
    }
    let m2 = rel(p.eps, -p.delta);
    if m2 > rel_tol {
        return Err(ModelError::Constraint {
            relation: "eps = -delta",
            mismatch: m2,
        });
    }
    if p.beta == 0.0 {
        return Err(ModelError::ZeroParameter("beta"));
    }
    let q1 = p.current - (p.c + p.h) / p.beta;
    let q2 = (p.current - s0.w + s0.y) - q1;
    Ok(FirstIntegral { q1, q2, rate: p.eta() })
}

/// Which cubic convention an [`FhrSystem`] integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModelForm {
    #[default]
    General,
    Classic,
}

/// The three-variable model as an [`OdeSystem`].
#[derive(Debug, Clone, Copy)]
pub struct FhrSystem {
    pub params: FhrParams,
    pub form: ModelForm,
}

impl FhrSystem {
    pub fn new(params: FhrParams, form: ModelForm) -> Self {
        FhrSystem { params, form }
    }
}

impl OdeSystem for FhrSystem {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        let s = State::from_slice(y);
        let ds = match self.form {
            ModelForm::General => self.params.rhs_unchecked(s),
            ModelForm::Classic => self.params.rhs_classic_unchecked(s),
        };
        dydt[0] = ds.u;
        dydt[1] = ds.w;
        dydt[2] = ds.y;
    }

    fn jacobian(&self, _t: f64, y: &[f64]) -> Option<Jacobian> {
        let s = State::from_slice(y);
        let mut j = self.params.jacobian_unchecked(s);
        if self.form == ModelForm::Classic {
            j[0][0] = 1.0 - s.u * s.u;
        }
        Some(Jacobian::dense_from_rows(&j))
    }
}

/// The scalar first-integral reduction as an [`OdeSystem`].
#[derive(Debug, Clone, Copy)]
pub struct ReducedSystem {
    pub integral: FirstIntegral,
}

impl OdeSystem for ReducedSystem {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        let u = y[0];
        dydt[0] = u - u * u * u / 3.0 + self.integral.forcing(t);
    }

    fn jacobian(&self, _t: f64, y: &[f64]) -> Option<Jacobian> {
        Some(Jacobian::dense_from_rows(&[[1.0 - y[0] * y[0]]]))
    }
}
