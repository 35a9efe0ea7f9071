//! Trajectory-level checks of a certificate.

use serde::Serialize;
use thiserror::Error;

use crate::certificate::{certificate, BoundsCertificate, CertError, EntryTime};
use crate::model::{energy, energy_rate_unchecked, FhrParams, State};
use crate::ode::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("trajectory was produced with different parameters than the certificate")]
    ParamsMismatch,
    #[error("expected a three-component trajectory, got dimension {0}")]
    Dimension(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Violations are counted when an excess exceeds `tol * (1 + |E|)`.
    pub tol: f64,
    /// Dense-output samples per accepted step (1 = knots only).
    pub per_step: usize,
    /// Ball `E <= r2` whose first entry is measured.
    pub r2: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: 1e-7,
            per_step: 4,
            r2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantMismatch {
    pub name: &'static str,
    pub stated: f64,
    pub recomputed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub e0: f64,
    /// `max E(t) - envelope(t)`.
    pub max_envelope_excess: f64,
    pub envelope_violations: usize,
    /// `max E(t) - (E0 + C1/C)`.
    pub max_bound_excess: f64,
    pub bound_violations: usize,
    /// `max dE/dt - (-C E + C1)`.
    pub max_rate_excess: f64,
    pub rate_violations: usize,
    /// Certificate constants that disagree with a recomputation from the
    /// certificate's own parameters and slack.
    pub constant_mismatches: Vec<ConstantMismatch>,
    pub entry: Option<EntryCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryCheck {
    pub r2: f64,
    /// First sample time with `E <= r2`; `None` if never reached.
    pub observed: Option<f64>,
    pub bound: EntryTime,
    /// Observed entry no later than the bound (or the bound not yet due).
    pub consistent: bool,
}

impl VerificationReport {
    /// Violations that show up along the trajectory itself.
    pub fn trajectory_violations(&self) -> usize {
        self.envelope_violations
            + self.bound_violations
            + self.rate_violations
            + usize::from(self.entry.as_ref().is_some_and(|e| !e.consistent))
    }

    pub fn violations(&self) -> usize {
        self.trajectory_violations() + self.constant_mismatches.len()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

fn rel_differs(a: f64, b: f64) -> bool {
    !((a - b).abs() <= 1e-12 * a.abs().max(b.abs()))
}

/// Recompute the constants of `cert` from its parameters and slack.
pub fn audit_certificate(cert: &BoundsCertificate) -> Result<Vec<ConstantMismatch>, CertError> {
    let fresh = certificate(&cert.params, cert.eps1)?;
    let pairs = [
        ("f", cert.f, fresh.f),
        ("g", cert.g, fresh.g),
        ("A", cert.a_const, fresh.a_const),
        ("B", cert.b, fresh.b),
        ("B1", cert.b1, fresh.b1),
        ("C", cert.c_decay, fresh.c_decay),
        ("C1", cert.c_src, fresh.c_src),
    ];
    let mut out: Vec<ConstantMismatch> = pairs
        .into_iter()
        .filter(|(_, s, r)| rel_differs(*s, *r))
        .map(|(name, stated, recomputed)| ConstantMismatch {
            name,
            stated,
            recomputed,
        })
        .collect();
    if cert.valid != fresh.valid {
        out.push(ConstantMismatch {
            name: "valid",
            stated: f64::from(u8::from(cert.valid)),
            recomputed: f64::from(u8::from(fresh.valid)),
        });
    }
    Ok(out)
}

/// Check `E(t) <= envelope`, `E(t) <= E0 + C1/C` and
/// `dE/dt <= -C E + C1` at every dense-output sample of `traj`, which must
/// have been integrated with `params`.
pub fn verify_trajectory(
    cert: &BoundsCertificate,
    params: &FhrParams,
    traj: &Trajectory,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    if *params != cert.params {
        return Err(VerifyError::ParamsMismatch);
    }
    if traj.dim() != 3 {
        return Err(VerifyError::Dimension(traj.dim()));
    }
    let constant_mismatches = audit_certificate(cert)?;
    let t0 = traj.t_start();
    let e0 = energy(State::from_slice(traj.state(0)));
    let bound = cert.bound(e0)?;
    let (c, c1) = (cert.c_decay, cert.c_src);

    let mut report = VerificationReport {
        samples: 0,
        e0,
        max_envelope_excess: f64::NEG_INFINITY,
        envelope_violations: 0,
        max_bound_excess: f64::NEG_INFINITY,
        bound_violations: 0,
        max_rate_excess: f64::NEG_INFINITY,
        rate_violations: 0,
        constant_mismatches,
        entry: None,
    };
    let mut observed = None;
    for (t, y) in traj.dense_samples(opts.per_step) {
        let s = State::from_slice(&y);
        let e = energy(s);
        let slack = opts.tol * (1.0 + e.abs());
        let env = cert.envelope(e0, t - t0)?;
        let d_env = e - env;
        let d_bound = e - bound;
        let d_rate = energy_rate_unchecked(params, s) - (-c * e + c1);
        report.samples += 1;
        report.max_envelope_excess = report.max_envelope_excess.max(d_env);
        report.max_bound_excess = report.max_bound_excess.max(d_bound);
        report.max_rate_excess = report.max_rate_excess.max(d_rate);
        report.envelope_violations += usize::from(d_env > slack);
        report.bound_violations += usize::from(d_bound > slack);
        report.rate_violations += usize::from(d_rate > slack);
        if let Some(r2) = opts.r2 {
            if observed.is_none() && e <= r2 {
                observed = Some(t - t0);
            }
        }
    }
    if let Some(r2) = opts.r2 {
        let bound = cert.entry_time(e0, r2)?;
        let horizon = traj.t_end() - t0;
        let consistent = match (bound, observed) {
            (EntryTime::AlreadyInside, obs) => obs == Some(0.0),
            (EntryTime::After(tau), Some(obs)) => obs <= tau,
            (EntryTime::After(tau), None) => horizon < tau,
        };
        report.entry = Some(EntryCheck {
            r2,
            observed,
            bound,
            consistent,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FhrSystem, ModelForm};
    use crate::ode::{integrate, IntegratorConfig};

    fn run(p: &FhrParams, s0: [f64; 3], tf: f64) -> Trajectory {
        let sys = FhrSystem::new(*p, ModelForm::General);
        integrate(&sys, 0.0, tf, &s0, &IntegratorConfig::with_tol(1e-9), &[])
            .unwrap()
            .trajectory
    }

    #[test]
    fn certified_trajectory_passes() {
        let p = FhrParams::reference_set(-0.98, 0.0);
        let cert = certificate(&p, 1e-4).unwrap();
        let traj = run(&p, [0.5, -0.3, 0.2], 500.0);
        let rep = verify_trajectory(&cert, &p, &traj, &VerifyOptions::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.samples > traj.len());
    }

    #[test]
    fn zero_trajectory_meets_margins() {
        let p = FhrParams {
            current: 0.0,
            c: 0.0,
            h: 0.0,
            ..FhrParams::reference_set(-0.98, 0.0)
        };
        let cert = certificate(&p, 1e-4).unwrap();
        let traj = run(&p, [0.0, 0.0, 0.0], 10.0);
        let rep = verify_trajectory(&cert, &p, &traj, &VerifyOptions::default()).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.e0, 0.0);
        assert!(rep.max_envelope_excess <= 0.0);
    }

    #[test]
    fn corrupted_constants_are_reported() {
        let p = FhrParams::reference_set(-0.98, 0.0);
        let cert = certificate(&p, 1e-4).unwrap();
        let bad = BoundsCertificate {
            c_decay: 10.0 * cert.c_decay,
            ..cert
        };
        let traj = run(&p, [0.5, -0.3, 0.2], 50.0);
        let rep = verify_trajectory(&bad, &p, &traj, &VerifyOptions::default()).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.constant_mismatches[0].name, "C");
    }

    #[test]
    fn deflated_source_shows_along_trajectory() {
        let p = FhrParams::reference_set(-0.98, 0.0);
        let cert = certificate(&p, 1e-4).unwrap();
        let bad = BoundsCertificate { c_src: 0.0, ..cert };
        let traj = run(&p, [0.5, -0.3, 0.2], 50.0);
        let rep = verify_trajectory(&bad, &p, &traj, &VerifyOptions::default()).unwrap();
        assert!(rep.trajectory_violations() > 0);
    }

    #[test]
    fn mismatched_params_rejected() {
        let p = FhrParams::reference_set(-0.98, 0.0);
        let cert = certificate(&p, 1e-4).unwrap();
        let q = FhrParams { current: 0.0, ..p };
        let traj = run(&q, [0.1, 0.1, 0.1], 1.0);
        assert_eq!(
            verify_trajectory(&cert, &q, &traj, &VerifyOptions::default()),
            Err(VerifyError::ParamsMismatch)
        );
    }
}
