use std::fmt::Write as _;

use serde::Serialize;

use rinzelkit::io::fmt_f64;
use rinzelkit::model::{
    first_integral_offsets, rhs_classic, FhrSystem, FirstIntegral, ModelForm, ReducedSystem, State,
};
use rinzelkit::ode::{integrate, IntegratorConfig, Trajectory};

use crate::config::{missing, RunConfig};
use crate::error::CliError;
use crate::output::Output;

#[derive(Serialize)]
struct Curve {
    #[serde(rename = "Q1")]
    q1: f64,
    max_abs_u: f64,
    final_u: f64,
}

#[derive(Serialize)]
struct Summary {
    #[serde(rename = "Q1")]
    q1: f64,
    #[serde(rename = "Q2")]
    q2: f64,
    rate: f64,
    u0: f64,
    #[serde(rename = "T")]
    horizon: f64,
    /// Offsets derived from the full model under the constraints.
    derived: bool,
    max_abs_u: f64,
    /// `max |I - w + y - Q1 - Q2 e^{-rate t}|` along the full model.
    max_q_residual: Option<f64>,
    /// `max |du/dt + u^3/3 - u - Q1 - Q2 e^{-rate t}|` along the full model.
    max_u_residual: Option<f64>,
    /// `max |u_full - u_reduced|` on the output samples.
    max_reduction_gap: Option<f64>,
    sweep: Vec<Curve>,
}

fn reduced(fi: FirstIntegral, u0: f64, horizon: f64, cfg: &IntegratorConfig) -> Result<Trajectory, CliError> {
    Ok(integrate(&ReducedSystem { integral: fi }, 0.0, horizon, &[u0], cfg, &[])?.trajectory)
}

fn max_abs(traj: &Trajectory) -> f64 {
    traj.dense_samples(8)
        .iter()
        .map(|(_, y)| y[0].abs())
        .fold(0.0, f64::max)
}

pub fn run(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let p = cfg.params()?;
    let opts = cfg.first_integral.as_ref().ok_or_else(|| missing("first_integral"))?;
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(CliError::config(format!(
            "first_integral.T must be positive (got {})",
            opts.horizon
        )));
    }
    if opts.samples < 2 {
        return Err(CliError::config("first_integral.samples must be at least 2"));
    }
    let (fi, u0, full) = match (opts.q1, opts.q2) {
        (Some(q1), Some(q2)) => {
            let u0 = opts
                .u0
                .or(cfg.initial.map(|s| s.u))
                .ok_or_else(|| missing("first_integral.u0"))?;
            (FirstIntegral { q1, q2, rate: p.eta() }, u0, None)
        }
        (None, None) => {
            let s0 = cfg.initial()?;
            let fi = first_integral_offsets(&p, s0, opts.constraint_tol)?;
            let sys = FhrSystem::new(p, ModelForm::Classic);
            let traj = integrate(&sys, 0.0, opts.horizon, &s0.to_array(), &cfg.integrator, &[])?.trajectory;
            (fi, opts.u0.unwrap_or(s0.u), Some(traj))
        }
        _ => {
            return Err(CliError::config(
                "first_integral.Q1 and first_integral.Q2 must be given together",
            ))
        }
    };
    if !u0.is_finite() {
        return Err(CliError::config("u0 must be finite"));
    }
    let red = reduced(fi, u0, opts.horizon, &cfg.integrator)?;

    let (mut q_res, mut u_res): (Option<f64>, Option<f64>) = (None, None);
    if let Some(traj) = &full {
        let (mut wq, mut wu) = (0.0f64, 0.0f64);
        for (t, y) in traj.dense_samples(4) {
            let s = State::from_slice(&y);
            let f = fi.forcing(t);
            wq = wq.max((p.current - s.w + s.y - f).abs());
            let du = rhs_classic(&p, s)?.u;
            wu = wu.max((du + s.u.powi(3) / 3.0 - s.u - f).abs());
        }
        q_res = Some(wq);
        u_res = Some(wu);
    }

    let mut csv = String::from(if full.is_some() {
        "t,u,u_full,q_residual\n"
    } else {
        "t,u\n"
    });
    let mut gap: Option<f64> = None;
    for (t, y) in red.resample(opts.samples) {
        let _ = write!(csv, "{},{}", fmt_f64(t), fmt_f64(y[0]));
        if let Some(traj) = &full {
            let s = State::from_slice(&traj.eval(t).expect("same span"));
            let _ = write!(
                csv,
                ",{},{}",
                fmt_f64(s.u),
                fmt_f64(p.current - s.w + s.y - fi.forcing(t))
            );
            gap = Some(gap.unwrap_or(0.0).max((s.u - y[0]).abs()));
        }
        csv.push('\n');
    }
    out.write("first_integral.csv", csv)?;

    let mut sweep = Vec::new();
    if let Some(span) = opts.sweep {
        let mut long = String::from("Q1,t,u\n");
        for q1 in span.values("first_integral.sweep")? {
            let traj = reduced(FirstIntegral { q1, ..fi }, u0, opts.horizon, &cfg.integrator)?;
            for (t, y) in traj.resample(opts.samples) {
                let _ = writeln!(long, "{},{},{}", fmt_f64(q1), fmt_f64(t), fmt_f64(y[0]));
            }
            sweep.push(Curve {
                q1,
                max_abs_u: max_abs(&traj),
                final_u: traj.last_state()[0],
            });
        }
        out.write("first_integral_sweep.csv", long)?;
    }
    let summary = Summary {
        q1: fi.q1,
        q2: fi.q2,
        rate: fi.rate,
        u0,
        horizon: opts.horizon,
        derived: full.is_some(),
        max_abs_u: max_abs(&red),
        max_q_residual: q_res,
        max_u_residual: u_res,
        max_reduction_gap: gap,
        sweep,
    };
    out.json("first_integral.json", &summary)?;
    println!(
        "Q1 = {:.10e}  Q2 = {:.10e}  max |u| = {:.6}",
        fi.q1, fi.q2, summary.max_abs_u
    );
    if let (Some(q), Some(u)) = (q_res, u_res) {
        println!("residuals along the full model: q {q:.3e}, u {u:.3e}");
    }
    for c in &summary.sweep {
        println!("Q1 = {:+.3}: max |u| = {:.6}", c.q1, c.max_abs_u);
    }
    Ok(())
}
