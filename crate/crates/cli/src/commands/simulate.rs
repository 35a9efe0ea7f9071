use serde::Serialize;

use rinzelkit::certificate::certificate;
use rinzelkit::io::trajectory_csv;
use rinzelkit::model::{energy, FhrSystem, ModelForm, State};
use rinzelkit::ode::{integrate, Stats};
use rinzelkit::verify::{verify_trajectory, VerifyOptions};

use crate::config::{missing, RunConfig};
use crate::error::CliError;
use crate::output::Output;

#[derive(Serialize)]
struct Range {
    min: f64,
    max: f64,
}

#[derive(Serialize)]
struct BoundCheck {
    eps1: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "C1")]
    c1: f64,
    /// `E0 + C1/C`.
    bound: f64,
    samples: usize,
    max_bound_excess: f64,
    bound_violations: usize,
    max_rate_excess: f64,
    rate_violations: usize,
    holds: bool,
}

#[derive(Serialize)]
struct Summary {
    t_end: f64,
    #[serde(rename = "E0")]
    e0: f64,
    u: Range,
    w: Range,
    y: Range,
    #[serde(rename = "E")]
    energy: Range,
    stats: Stats,
    /// Absent when the certificate at `eps1` is not valid.
    certificate: Option<BoundCheck>,
}

fn range(v: impl Iterator<Item = f64>) -> Range {
    let (min, max) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    Range { min, max }
}

pub fn run(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let p = cfg.params()?;
    let s0 = cfg.initial()?;
    let opts = cfg.simulate.as_ref().ok_or_else(|| missing("simulate"))?;
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(CliError::config(format!(
            "simulate.T must be positive and finite (got {})",
            opts.horizon
        )));
    }
    let sys = FhrSystem::new(p, ModelForm::General);
    let traj = integrate(&sys, 0.0, opts.horizon, &s0.to_array(), &cfg.integrator, &[])?.trajectory;

    let dense = traj.dense_samples(opts.per_step.max(1));
    let states = || dense.iter().map(|(_, y)| State::from_slice(y));
    let e0 = energy(s0);
    let cert = certificate(&p, opts.eps1)?;
    let check = if cert.valid {
        let rep = verify_trajectory(
            &cert,
            &p,
            &traj,
            &VerifyOptions {
                per_step: opts.per_step.max(1),
                ..Default::default()
            },
        )
        .map_err(|e| CliError::config(e.to_string()))?;
        Some(BoundCheck {
            eps1: cert.eps1,
            c: cert.c_decay,
            c1: cert.c_src,
            bound: cert.bound(e0)?,
            samples: rep.samples,
            max_bound_excess: rep.max_bound_excess,
            bound_violations: rep.bound_violations,
            max_rate_excess: rep.max_rate_excess,
            rate_violations: rep.rate_violations,
            holds: rep.bound_violations == 0 && rep.rate_violations == 0,
        })
    } else {
        None
    };
    let summary = Summary {
        t_end: traj.t_end(),
        e0,
        u: range(states().map(|s| s.u)),
        w: range(states().map(|s| s.w)),
        y: range(states().map(|s| s.y)),
        energy: range(states().map(energy)),
        stats: traj.stats.clone(),
        certificate: check,
    };
    let csv = match opts.samples {
        Some(n) if n >= 2 => {
            let rows = traj.resample(n);
            trajectory_csv(3, rows.iter().map(|(t, y)| (*t, y.as_slice())))
        }
        Some(_) => return Err(CliError::config("simulate.samples must be at least 2")),
        None => traj.to_csv(),
    };
    out.write("trajectory.csv", csv)?;
    out.json("summary.json", &summary)?;
    println!(
        "{} steps ({} rejected), E in [{:.6e}, {:.6e}]",
        summary.stats.accepted, summary.stats.rejected, summary.energy.min, summary.energy.max
    );
    match &summary.certificate {
        Some(c) if c.holds => println!("E(t) <= E0 + C1/C = {:.6e} at all {} samples", c.bound, c.samples),
        Some(c) => {
            return Err(CliError::numerical(format!(
                "certified bound violated at {} samples (max excess {:.3e})",
                c.bound_violations + c.rate_violations,
                c.max_bound_excess.max(c.max_rate_excess)
            )))
        }
        None => println!("no valid certificate at eps1 = {}; bound not checked", opts.eps1),
    }
    Ok(())
}
