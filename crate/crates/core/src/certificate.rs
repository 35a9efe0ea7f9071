//! Energy certificates for the general three-variable model.
//!
//! With `E = (u^2 + w^2 + y^2)/2`, `eta = beta eps` and `gamma = delta d`,
//! any `eps1 >= 0` with `f > eps1` and `g > eps1` gives
//! `dE/dt <= -C E + C1` and therefore
//! `E(t) <= C1/C (1 - exp(-C t)) + E0 exp(-C t) <= E0 + C1/C`.
//!
//! ```text
//! f  = eta   - |eps - 1|/2 - (1 + a)^2 k/2
//! g  = gamma - |1 - delta|/2 - (1 + a)^2 k/2
//! A  = (a + 1)^2 k + 2 eps1
//! B  = f - eps1,  B1 = g - eps1,  C = 2 min(B, B1)
//! C1 = (I^2 + h^2 delta^2 + eps^2 c^2) / (4 eps1 + 2 k (a + 1)^2)
//!      + (-a + eta + gamma)^2 k/2
//! ```
//!
//! Near the ends of the feasible `a` interval `f` and `g` are differences of
//! nearly equal numbers. Values within [`MARGINAL_ULPS`] ulps of the scale of
//! their terms are flagged `marginal` instead of being trusted for sign.

use serde::Serialize;
use thiserror::Error;

use crate::model::{FhrParams, ModelError};

pub const MARGINAL_ULPS: f64 = 1e3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("k must be positive (got {0})")]
    NonPositiveK(f64),
    #[error("eps1 must be finite and non-negative (got {0})")]
    BadSlack(f64),
    #[error("no admissible eps1: min(f, g) = {0:e} <= 0")]
    Infeasible(f64),
    #[error("certificate is not valid (f = {f:e}, g = {g:e}, eps1 = {eps1:e})")]
    InvalidCertificate { f: f64, g: f64, eps1: f64 },
    #[error("{0} must be finite and non-negative")]
    BadInput(&'static str),
    #[error("threshold r^2 = {r2:e} is not above C1/C = {limit:e}; the envelope never reaches it")]
    Unreachable { r2: f64, limit: f64 },
}

fn marginal(value: f64, scale: f64) -> bool {
    value.abs() <= MARGINAL_ULPS * f64::EPSILON * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margins {
    pub f: f64,
    pub g: f64,
    pub f_marginal: bool,
    pub g_marginal: bool,
}

impl Margins {
    pub fn min(&self) -> f64 {
        self.f.min(self.g)
    }
}

fn check_k(p: &FhrParams) -> Result<(), CertError> {
    p.validate()?;
    if !(p.k > 0.0) {
        return Err(CertError::NonPositiveK(p.k));
    }
    Ok(())
}

// largest term entering f and g
fn scales(p: &FhrParams) -> (f64, f64) {
    let s = 1.0 + p.a;
    let curv = s * s * p.k / 2.0;
    let (de, dd) = ((p.eps - 1.0).abs() / 2.0, (1.0 - p.delta).abs() / 2.0);
    (p.eta().abs().max(de).max(curv), p.gamma().abs().max(dd).max(curv))
}

pub fn margins(p: &FhrParams) -> Result<Margins, CertError> {
    check_k(p)?;
    // (1 + a) is formed once and squared
    let s = 1.0 + p.a;
    let curv = s * s * p.k / 2.0;
    let f = p.eta() - (p.eps - 1.0).abs() / 2.0 - curv;
    let g = p.gamma() - (1.0 - p.delta).abs() / 2.0 - curv;
    let (sf, sg) = scales(p);
    Ok(Margins {
        f,
        g,
        f_marginal: marginal(f, sf),
        g_marginal: marginal(g, sg),
    })
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The set of `a` with `min(f, g) > 0`, i.e. `(-1 - s, -1 + s)`; `None` when
/// empty. The `a` stored in `p` is ignored.
pub fn feasible_a_interval(p: &FhrParams) -> Result<Option<Interval>, CertError> {
    check_k(p)?;
    let m = (p.eta() - (p.eps - 1.0).abs() / 2.0).min(p.gamma() - (1.0 - p.delta).abs() / 2.0);
    if !(m > 0.0) {
        return Ok(None);
    }
    let s = (2.0 * m / p.k).sqrt();
    Ok(Some(Interval {
        lo: -1.0 - s,
        hi: -1.0 + s,
    }))
}

/// Admissible slack `[0, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlackInterval {
    pub lower: f64,
    pub upper: f64,
    /// The upper end is within rounding of zero.
    pub marginal: bool,
}

pub fn admissible_eps1(p: &FhrParams) -> Result<SlackInterval, CertError> {
    let m = margins(p)?;
    let upper = m.min();
    let upper_marginal = if m.f <= m.g { m.f_marginal } else { m.g_marginal };
    if !(upper > 0.0) || upper_marginal {
        return Err(CertError::Infeasible(upper));
    }
    Ok(SlackInterval {
        lower: 0.0,
        upper,
        marginal: upper_marginal,
    })
}

/// All certificate constants for one `(params, eps1)`. Invalid
/// certificates are ordinary values with `valid = false`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsCertificate {
    #[serde(skip)]
    pub params: FhrParams,
    pub eps1: f64,
    pub f: f64,
    pub g: f64,
    #[serde(rename = "A")]
    pub a_const: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "C")]
    pub c_decay: f64,
    #[serde(rename = "C1")]
    pub c_src: f64,
    pub valid: bool,
    /// `f - eps1` or `g - eps1` is within rounding of zero.
    pub marginal: bool,
}

/// The `C1` display.
fn source_constant(p: &FhrParams, eps1: f64) -> f64 {
    let s = 1.0 + p.a;
    let num = p.current * p.current + p.h * p.h * p.delta * p.delta + p.eps * p.eps * p.c * p.c;
    let den = 4.0 * eps1 + 2.0 * p.k * s * s;
    let quotient = if num == 0.0 { 0.0 } else { num / den };
    let lin = -p.a + p.eta() + p.gamma();
    quotient + lin * lin * p.k / 2.0
}

pub fn certificate(p: &FhrParams, eps1: f64) -> Result<BoundsCertificate, CertError> {
    if !(eps1 >= 0.0 && eps1.is_finite()) {
        return Err(CertError::BadSlack(eps1));
    }
    let m = margins(p)?;
    let s = 1.0 + p.a;
    let b = m.f - eps1;
    let b1 = m.g - eps1;
    let c_decay = 2.0 * b.min(b1);
    let (sf, sg) = scales(p);
    let marginal_slack = marginal(b, sf.max(eps1)) || marginal(b1, sg.max(eps1));
    let valid = m.f > eps1 && m.g > eps1 && !marginal_slack;
    if valid {
        debug_assert!(b > 0.0 && b1 > 0.0);
    }
    Ok(BoundsCertificate {
        params: *p,
        eps1,
        f: m.f,
        g: m.g,
        a_const: s * s * p.k + 2.0 * eps1,
        b,
        b1,
        c_decay,
        c_src: source_constant(p, eps1),
        valid,
        marginal: marginal_slack || m.f_marginal || m.g_marginal,
    })
}

/// Absorbing ball `E <= r2 = C1/C + K0`, radius `R = sqrt(2 r2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsorbingSet {
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "tau", rename_all = "snake_case")]
pub enum EntryTime {
    AlreadyInside,
    After(f64),
}

impl BoundsCertificate {
    fn require_valid(&self) -> Result<(), CertError> {
        if self.valid {
            Ok(())
        } else {
            Err(CertError::InvalidCertificate {
                f: self.f,
                g: self.g,
                eps1: self.eps1,
            })
        }
    }

    /// `C1 / C`, the asymptotic energy level.
    pub fn ratio(&self) -> f64 {
        self.c_src / self.c_decay
    }

    pub fn envelope(&self, e0: f64, t: f64) -> Result<f64, CertError> {
        self.require_valid()?;
        if !(e0 >= 0.0 && e0.is_finite()) {
            return Err(CertError::BadInput("E0"));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CertError::BadInput("t"));
        }
        let decay = (-self.c_decay * t).exp();
        Ok(self.ratio() * (1.0 - decay) + e0 * decay)
    }

    pub fn bound(&self, e0: f64) -> Result<f64, CertError> {
        self.require_valid()?;
        if !(e0 >= 0.0 && e0.is_finite()) {
            return Err(CertError::BadInput("E0"));
        }
        Ok(e0 + self.ratio())
    }

    pub fn absorbing_set(&self, k0: f64) -> Result<AbsorbingSet, CertError> {
        self.require_valid()?;
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(CertError::BadInput("K0"));
        }
        let r2 = self.ratio() + k0;
        Ok(AbsorbingSet {
            k0,
            radius: (2.0 * r2).sqrt(),
            r2,
        })
    }

    /// Time after which the envelope started at `e0` stays below `r2`:
    /// `tau = ln(|e0 - C1/C| / |r2 - C1/C|) / C`.
    pub fn entry_time(&self, e0: f64, r2: f64) -> Result<EntryTime, CertError> {
        self.require_valid()?;
        if !(e0 >= 0.0 && e0.is_finite()) {
            return Err(CertError::BadInput("E0"));
        }
        let limit = self.ratio();
        if !(r2 > limit) {
            return Err(CertError::Unreachable { r2, limit });
        }
        if e0 <= r2 {
            return Ok(EntryTime::AlreadyInside);
        }
        Ok(EntryTime::After(
            ((e0 - limit).abs() / (r2 - limit).abs()).ln() / self.c_decay,
        ))
    }
}

pub fn energy_envelope(cert: &BoundsCertificate, e0: f64, t: f64) -> Result<f64, CertError> {
    cert.envelope(e0, t)
}

pub fn energy_bound(cert: &BoundsCertificate, e0: f64) -> Result<f64, CertError> {
    cert.bound(e0)
}

pub fn absorbing_set(cert: &BoundsCertificate, k0: f64) -> Result<AbsorbingSet, CertError> {
    cert.absorbing_set(k0)
}

pub fn entry_time(cert: &BoundsCertificate, e0: f64, r2: f64) -> Result<EntryTime, CertError> {
    cert.entry_time(e0, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub eps1: f64,
    pub objective: f64,
    /// The grid fallback replaced the golden-section result.
    pub used_grid: bool,
}

const GRID_POINTS: usize = 10_000;

/// Minimise `C1/C` over `eps1 in [0, min(f, g)(1 - 1e-9)]` by golden-section
/// search, checked against a uniform grid.
pub fn optimize_eps1(p: &FhrParams) -> Result<(Optimum, BoundsCertificate), CertError> {
    let slack = admissible_eps1(p)?;
    let hi = slack.upper * (1.0 - 1e-9);
    let objective = |e: f64| {
        let b = certificate(p, e).expect("admissible slack");
        b.ratio()
    };
    if hi < 1e-12 {
        let cert = certificate(p, 0.0)?;
        return Ok((
            Optimum {
                eps1: 0.0,
                objective: cert.ratio(),
                used_grid: false,
            },
            cert,
        ));
    }
    let (mut best, mut best_val) = golden(&objective, 0.0, hi);
    for e in [0.0, hi] {
        let v = objective(e);
        if v < best_val {
            best = e;
            best_val = v;
        }
    }

    let step = hi / (GRID_POINTS - 1) as f64;
    let (gi, gval) = (0..GRID_POINTS)
        .map(|i| (i, objective(i as f64 * step)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let mut used_grid = false;
    if gval < best_val && (best_val - gval) > 1e-6 * gval.abs() {
        used_grid = true;
        let lo = (gi.saturating_sub(1)) as f64 * step;
        let up = ((gi + 1).min(GRID_POINTS - 1)) as f64 * step;
        let (e, v) = golden(&objective, lo, up);
        (best, best_val) = if v < gval { (e, v) } else { (gi as f64 * step, gval) };
    }
    let cert = certificate(p, best)?;
    Ok((
        Optimum {
            eps1: best,
            objective: best_val,
            used_grid,
        },
        cert,
    ))
}

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference(a: f64) -> FhrParams {
        FhrParams::reference_set(a, 1.0)
    }

    #[test]
    fn margins_at_worked_point() {
        let m = margins(&reference(-0.98)).unwrap();
        assert!((m.f - 0.0002).abs() < 1e-15);
        assert!((m.g - 0.2494).abs() < 1e-15);
        assert!(!m.f_marginal && !m.g_marginal);
        let m = margins(&reference(-1.0)).unwrap();
        assert!((m.f - (0.1008 - 0.1)).abs() < 1e-16);
        assert!((m.g - 0.25).abs() < 1e-16);
    }

    #[test]
    fn unit_rates_reduce_margins_to_beta_and_d() {
        let mut p = reference(-1.0);
        p.eps = 1.0;
        p.delta = 1.0;
        let m = margins(&p).unwrap();
        assert_eq!(m.f, p.beta);
        assert_eq!(m.g, p.d);
    }

    #[test]
    fn k_must_be_positive() {
        let mut p = reference(-0.98);
        p.k = -1.0;
        assert_eq!(margins(&p), Err(CertError::NonPositiveK(-1.0)));
        assert!(certificate(&p, 0.0).is_err());
    }

    #[test]
    fn feasible_interval_values() {
        let iv = feasible_a_interval(&reference(0.0)).unwrap().unwrap();
        let s = 3f64.sqrt() / 75.0;
        assert!((iv.lo - (-1.0 - s)).abs() < 1e-15);
        assert!((iv.hi - (-1.0 + s)).abs() < 1e-15);
        assert!((iv.lo + 1.023094011).abs() < 1e-9);
        assert!((iv.hi + 0.9769059892).abs() < 1e-9);

        let mut p = reference(0.0);
        p.beta = 0.1;
        assert!(feasible_a_interval(&p).unwrap().is_none());

        let p = FhrParams {
            eps: 1.0,
            delta: 1.0,
            beta: 2.0,
            d: 2.0,
            k: 1.0,
            ..reference(0.0)
        };
        let iv = feasible_a_interval(&p).unwrap().unwrap();
        assert_eq!((iv.lo, iv.hi), (-3.0, 1.0));
    }

    #[test]
    fn slack_interval() {
        let s = admissible_eps1(&reference(-0.98)).unwrap();
        assert!((s.upper - 0.0002).abs() < 1e-12);
        let s = admissible_eps1(&reference(-1.0)).unwrap();
        assert!((s.upper - 0.0008).abs() < 1e-15);
        let edge = -1.0 + 3f64.sqrt() / 75.0;
        assert!(admissible_eps1(&reference(edge)).is_err());
    }

    #[test]
    fn source_constant_matches_oracle() {
        // extended-precision evaluation of the C1 display
        let c = certificate(&reference(-1.0230940107), 0.0).unwrap();
        let oracle = 89.39695438707257;
        assert!((c.c_src - oracle).abs() < 1e-9 * oracle);
        let c = certificate(&reference(-0.98), 1e-4).unwrap();
        assert!(c.valid);
        assert!((c.c_decay - 2e-4).abs() < 1e-15);
        assert!((c.c_src - 101.39571438857143).abs() < 1e-9 * 101.4);
    }

    #[test]
    fn source_constant_vanishes() {
        let p = FhrParams {
            current: 0.0,
            c: 0.0,
            h: 0.0,
            ..reference(-0.98)
        };
        let p = FhrParams {
            a: p.eta() + p.gamma(),
            ..p
        };
        assert_eq!(certificate(&p, 0.0).unwrap().c_src, 0.0);
    }

    #[test]
    fn swapping_roles_swaps_b_and_b1() {
        let p = reference(-0.99);
        let q = FhrParams {
            beta: p.d,
            eps: p.delta,
            d: p.beta,
            delta: p.eps,
            ..p
        };
        let (c1, c2) = (certificate(&p, 1e-5).unwrap(), certificate(&q, 1e-5).unwrap());
        assert!((c1.b - c2.b1).abs() < 1e-15 && (c1.b1 - c2.b).abs() < 1e-15);
        assert!((c1.c_decay - c2.c_decay).abs() < 1e-15);
    }

    #[test]
    fn boundary_slack_is_invalid_and_marginal() {
        let c = certificate(&reference(-0.98), 0.0002).unwrap();
        assert!(!c.valid);
        assert!(c.marginal);
        assert!(c.envelope(1.0, 1.0).is_err());
    }

    #[test]
    fn envelope_limits() {
        let c = certificate(&reference(-0.98), 1e-4).unwrap();
        assert_eq!(c.envelope(3.0, 0.0).unwrap(), 3.0);
        let far = c.envelope(3.0, 100.0 / c.c_decay).unwrap();
        assert!((far - c.ratio()).abs() < 1e-6 * c.ratio());
        let fixed = c.ratio();
        for t in [0.0, 1.0, 1e3, 1e5] {
            assert!((c.envelope(fixed, t).unwrap() - fixed).abs() < 1e-9 * fixed);
        }
        assert_eq!(c.bound(0.0).unwrap(), c.ratio());
    }

    #[test]
    fn quoted_magnitude_arithmetic() {
        let (c, c1): (f64, f64) = (2e-12, 85.7089051);
        let r = (2.0 * c1 / c).sqrt();
        assert!((r / 9.2579e6 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn absorbing_set_relations() {
        let c = certificate(&reference(-0.98), 1e-4).unwrap();
        let s1 = c.absorbing_set(1.0).unwrap();
        let s2 = c.absorbing_set(2.0).unwrap();
        assert!((s2.radius.powi(2) - s1.radius.powi(2) - 2.0).abs() < 1e-9 * s1.r2);
        assert!((s1.r2 - s1.radius.powi(2) / 2.0).abs() < 1e-9 * s1.r2);
        let tiny = c.absorbing_set(1e-300).unwrap();
        assert!((tiny.radius - (2.0 * c.ratio()).sqrt()).abs() < 1e-12 * tiny.radius);
        assert!(c.absorbing_set(0.0).is_err());

        let silent = BoundsCertificate { c_src: 0.0, ..c };
        let s = silent.absorbing_set(4.0).unwrap();
        assert_eq!(s.radius, 8f64.sqrt());
    }

    #[test]
    fn entry_time_cases() {
        let c = certificate(&reference(-0.98), 1e-4).unwrap();
        let set = c.absorbing_set(1.0).unwrap();
        assert_eq!(c.entry_time(set.r2, set.r2).unwrap(), EntryTime::AlreadyInside);
        assert!(matches!(
            c.entry_time(1.0, c.ratio()),
            Err(CertError::Unreachable { .. })
        ));
        let e0 = 5.0 * set.r2;
        let EntryTime::After(tau) = c.entry_time(e0, set.r2).unwrap() else {
            panic!()
        };
        let back = c.envelope(e0, tau).unwrap();
        assert!((back - set.r2).abs() < 1e-10 * set.r2);
        let e1 = c.ratio() + 2.0 * (e0 - c.ratio());
        let EntryTime::After(tau2) = c.entry_time(e1, set.r2).unwrap() else {
            panic!()
        };
        assert!((tau2 - tau - 2f64.ln() / c.c_decay).abs() < 1e-9 * tau2);
    }

    #[test]
    fn optimizer_beats_endpoints() {
        let p = reference(-0.98);
        let (opt, cert) = optimize_eps1(&p).unwrap();
        let at = |e: f64| certificate(&p, e).unwrap().ratio();
        assert!(opt.objective <= at(0.0));
        assert!(opt.objective <= at(0.00019));
        assert_eq!(opt.objective, cert.c_src / cert.c_decay);
        assert!(cert.valid);
    }

    #[test]
    fn optimizer_degenerate_interval() {
        // eps = 1, a = -1: f = beta exactly
        let p = FhrParams {
            a: -1.0,
            eps: 1.0,
            beta: 5e-13,
            ..reference(0.0)
        };
        assert_eq!(admissible_eps1(&p).unwrap().upper, 5e-13);
        let (opt, cert) = optimize_eps1(&p).unwrap();
        assert_eq!(opt.eps1, 0.0);
        assert!(cert.valid);
    }

    #[test]
    fn infeasible_slack_errors() {
        let p = reference(-1.1);
        assert!(matches!(optimize_eps1(&p), Err(CertError::Infeasible(_))));
        let c = certificate(&p, 0.0).unwrap();
        assert!(!c.valid);
    }

    proptest! {
        #[test]
        fn margins_monotone_in_curvature(
            a1 in -1.5f64..-0.5, a2 in -1.5f64..-0.5, k1 in 0.1f64..10.0, k2 in 0.1f64..10.0
        ) {
            let p1 = FhrParams { a: a1, k: k1, ..reference(0.0) };
            let p2 = FhrParams { a: a2, k: k2, ..reference(0.0) };
            let (m1, m2) = (margins(&p1).unwrap(), margins(&p2).unwrap());
            if (1.0 + a1).powi(2) * k1 <= (1.0 + a2).powi(2) * k2 {
                prop_assert!(m1.f >= m2.f && m1.g >= m2.g);
            }
        }

        #[test]
        fn feasible_intervals_nest(k1 in 0.1f64..10.0, dk in 0.0f64..10.0) {
            let i1 = feasible_a_interval(&FhrParams { k: k1, ..reference(0.0) }).unwrap().unwrap();
            let i2 = feasible_a_interval(&FhrParams { k: k1 + dk, ..reference(0.0) }).unwrap().unwrap();
            prop_assert!(i2.lo >= i1.lo && i2.hi <= i1.hi);
        }

        #[test]
        fn bound_dominates_envelope(a in -1.02f64..-0.98, frac in 0.0f64..0.99, e0 in 0.0f64..1e6, t in 0.0f64..1e7) {
            let p = reference(a);
            if let Ok(s) = admissible_eps1(&p) {
                let c = certificate(&p, frac * s.upper).unwrap();
                if c.valid {
                    let env = c.envelope(e0, t).unwrap();
                    let b = c.bound(e0).unwrap();
                    prop_assert!(env <= b * (1.0 + 1e-15));
                }
            }
        }

        #[test]
        fn entry_time_round_trip(a in -1.01f64..-0.99, frac in 0.0f64..0.9, k0 in 0.1f64..10.0, mult in 1.01f64..100.0) {
            let p = reference(a);
            if let Ok(s) = admissible_eps1(&p) {
                let c = certificate(&p, frac * s.upper).unwrap();
                prop_assume!(c.valid);
                let set = c.absorbing_set(k0).unwrap();
                let e0 = set.r2 * mult;
                if let EntryTime::After(tau) = c.entry_time(e0, set.r2).unwrap() {
                    let back = c.envelope(e0, tau).unwrap();
                    prop_assert!((back - set.r2).abs() <= 1e-10 * set.r2);
                }
            }
        }

        #[test]
        fn optimizer_invariant_under_objective_scaling(a in -1.015f64..-0.985) {
            // the minimiser of C1/C equals the minimiser of (C1/C) * 1e3
            let p = reference(a);
            prop_assume!(admissible_eps1(&p).is_ok());
            let (opt, _) = optimize_eps1(&p).unwrap();
            let hi = admissible_eps1(&p).unwrap().upper * (1.0 - 1e-9);
            let scaled = |e: f64| 1e3 * certificate(&p, e).unwrap().ratio();
            let (e2, _) = golden(&scaled, 0.0, hi);
            // a flat minimum is only resolved to about sqrt(ulp) in eps1
            prop_assert!((e2 - opt.eps1).abs() <= 1e-7 * hi, "{e2} {opt:?} {hi}");
        }
    }
}
