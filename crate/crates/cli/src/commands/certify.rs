use serde::Serialize;

use rinzelkit::certificate::{
    admissible_eps1, certificate, feasible_a_interval, margins, optimize_eps1, AbsorbingSet, BoundsCertificate,
    EntryTime, Interval, Margins, Optimum, SlackInterval,
};
use rinzelkit::model::{energy, FhrParams};

use crate::config::{CertifyOpts, RunConfig};
use crate::error::CliError;
use crate::output::Output;

#[derive(Serialize)]
pub struct CertifyReport {
    pub params: FhrParams,
    pub eta: f64,
    pub gamma: f64,
    pub margins: Margins,
    /// Open interval of `a` with `min(f, g) > 0`.
    pub feasible_a: Option<Interval>,
    /// `[0, min(f, g))`.
    pub eps1_interval: Option<SlackInterval>,
    pub optimum: Option<Optimum>,
    pub certificate: BoundsCertificate,
    #[serde(rename = "E0")]
    pub e0: f64,
    /// `C1 / C`.
    pub ratio: Option<f64>,
    /// `E0 + C1/C`.
    pub bound: Option<f64>,
    pub absorbing_set: Option<AbsorbingSet>,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub tau: Option<EntryTime>,
    pub valid: bool,
    pub marginal: bool,
}

pub fn report(p: &FhrParams, opts: &CertifyOpts, e0: f64, optimize: bool) -> Result<CertifyReport, CliError> {
    let m = margins(p)?;
    let feasible_a = feasible_a_interval(p)?;
    let slack = admissible_eps1(p).ok();
    let (optimum, cert) = if optimize && slack.is_some() {
        let (o, c) = optimize_eps1(p)?;
        (Some(o), c)
    } else {
        (None, certificate(p, opts.eps1)?)
    };
    if !(e0 >= 0.0 && e0.is_finite()) {
        return Err(CliError::config(format!(
            "E0 must be finite and non-negative (got {e0})"
        )));
    }
    let (ratio, bound, set, tau) = if cert.valid {
        let set = cert.absorbing_set(opts.k0)?;
        (
            Some(cert.ratio()),
            Some(cert.bound(e0)?),
            Some(set),
            Some(cert.entry_time(e0, set.r2)?),
        )
    } else {
        (None, None, None, None)
    };
    Ok(CertifyReport {
        params: *p,
        eta: p.eta(),
        gamma: p.gamma(),
        margins: m,
        feasible_a,
        eps1_interval: slack,
        optimum,
        certificate: cert,
        e0,
        ratio,
        bound,
        radius: set.map(|s| s.radius),
        absorbing_set: set,
        tau,
        valid: cert.valid,
        marginal: cert.marginal,
    })
}

pub fn run(cfg: &RunConfig, optimize: bool, out: &Output) -> Result<(), CliError> {
    let p = cfg.params()?;
    let opts = cfg.certify.clone().unwrap_or_default();
    if !(opts.k0 > 0.0 && opts.k0.is_finite()) {
        return Err(CliError::config(format!(
            "certify.K0 must be positive (got {})",
            opts.k0
        )));
    }
    let e0 = match (opts.e0, cfg.initial) {
        (Some(e), _) => e,
        (None, Some(s)) => energy(s),
        (None, None) => 0.0,
    };
    let rep = report(&p, &opts, e0, optimize || opts.optimize_eps1)?;
    out.json("certificate.json", &rep)?;

    println!("f = {:.10e}  g = {:.10e}", rep.margins.f, rep.margins.g);
    match rep.feasible_a {
        Some(iv) => println!("feasible a: ({:.10}, {:.10})", iv.lo, iv.hi),
        None => println!("feasible a: empty"),
    }
    match rep.eps1_interval {
        Some(s) => println!("admissible eps1: [0, {:.10e})", s.upper),
        None => println!("admissible eps1: empty"),
    }
    let c = &rep.certificate;
    println!(
        "eps1 = {:e}  C = {:.10e}  C1 = {:.10e}  valid = {}",
        c.eps1, c.c_decay, c.c_src, c.valid
    );
    if let (Some(r), Some(tau)) = (rep.radius, rep.tau) {
        match tau {
            EntryTime::AlreadyInside => println!("R = {r:.10e}  E0 <= r^2: already inside"),
            EntryTime::After(t) => println!("R = {r:.10e}  tau = {t:.10e}"),
        }
    }
    Ok(())
}
