use serde::Serialize;

use rinzelkit::kernel::{heat_kernel, KernelField};

use crate::config::{missing, RunConfig};
use crate::error::CliError;
use crate::output::Output;

#[derive(Serialize)]
struct Summary {
    nodes: usize,
    tol: f64,
    budget: usize,
    max_error: f64,
    /// `max |H - heat kernel e^{-at}|`; reported when eps = delta = 0.
    max_heat_deviation: Option<f64>,
}

pub fn run(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let p = cfg.params()?;
    let opts = cfg.kernel.as_ref().ok_or_else(|| missing("kernel"))?;
    let xs = opts.x.values("kernel.x")?;
    let ts = opts.t.values("kernel.t")?;
    let field = KernelField::compute(&p, &xs, &ts, opts.tol, opts.budget)?;
    let max_heat_deviation = (p.eps == 0.0 && p.delta == 0.0).then(|| {
        let mut worst: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            for (j, &t) in ts.iter().enumerate() {
                let want = heat_kernel(x, t, p.diffusion, p.a);
                worst = worst.max((field.h[field.index(i, j)] - want).abs());
            }
        }
        worst
    });
    let summary = Summary {
        nodes: field.h.len(),
        tol: opts.tol,
        budget: opts.budget,
        max_error: field.error.iter().copied().fold(0.0, f64::max),
        max_heat_deviation,
    };
    let set = field.fields();
    out.write("kernel.bin", set.to_binary())?;
    for name in ["H", "H1", "H2"] {
        out.write(&format!("kernel_{name}.csv"), set.to_csv(name).expect("field present"))?;
    }
    out.json("kernel_summary.json", &summary)?;
    println!("{} nodes, max error estimate {:.3e}", summary.nodes, summary.max_error);
    if let Some(d) = max_heat_deviation {
        println!("max |H - damped heat kernel| = {d:.3e}");
    }
    Ok(())
}
