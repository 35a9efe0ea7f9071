use serde::Serialize;

use rinzelkit::crosscheck::crosscheck;
use rinzelkit::field::PdeSolution;
use rinzelkit::kernel::{picard_solve, SourceContext};

use crate::config::{missing, RunConfig};
use crate::error::CliError;
use crate::output::Output;

#[derive(Serialize)]
struct Gap {
    refine: usize,
    u: f64,
    w: f64,
    y: f64,
}

#[derive(Serialize)]
struct Log {
    sweeps: usize,
    residuals: Vec<f64>,
    ratios: Vec<f64>,
    contraction_ratio: Option<f64>,
    converged: bool,
    crosscheck: Option<Gap>,
}

fn log(sol: &PdeSolution, crosscheck: Option<Gap>) -> Log {
    Log {
        sweeps: sol.residuals.len(),
        residuals: sol.residuals.clone(),
        ratios: sol.residual_ratios(),
        contraction_ratio: sol.contraction_ratio(),
        converged: sol.converged,
        crosscheck,
    }
}

pub fn run(cfg: &RunConfig, with_crosscheck: bool, out: &Output) -> Result<(), CliError> {
    let p = cfg.params()?;
    let opts = cfg.picard.as_ref().ok_or_else(|| missing("picard"))?;
    let ctx = SourceContext::new(p, opts.w0.clone(), opts.y0.clone())?;
    let (sol, gap) = if with_crosscheck {
        let cc = crosscheck(&opts.u0, &ctx, &opts.grid, &opts.options, opts.refine, &cfg.integrator)?;
        out.write("lines.bin", cc.lines.fields().to_binary())?;
        let gap = Gap {
            refine: opts.refine,
            u: cc.gap,
            w: cc.gap_w,
            y: cc.gap_y,
        };
        (cc.picard, Some(gap))
    } else {
        (picard_solve(&opts.u0, &ctx, &opts.grid, &opts.options)?, None)
    };
    let set = sol.fields();
    out.write("picard.bin", set.to_binary())?;
    out.write("picard_u.csv", set.to_csv("u").expect("u present"))?;
    let log = log(&sol, gap);
    out.json("picard_log.json", &log)?;
    println!(
        "{} sweeps, last update {:.3e}, contraction ratio {:?}",
        log.sweeps,
        log.residuals.last().copied().unwrap_or(0.0),
        log.contraction_ratio
    );
    if let Some(g) = &log.crosscheck {
        println!(
            "sup-norm gap to lines solver: u {:.3e}, w {:.3e}, y {:.3e}",
            g.u, g.w, g.y
        );
    }
    if !log.converged {
        return Err(CliError::numerical(format!(
            "Picard sweeps did not reach tol = {:e} within {} sweeps",
            opts.options.tol, opts.options.max_sweeps
        )));
    }
    Ok(())
}
