use rinzelkit::scan::{scan, Axis};

use crate::config::{missing, RunConfig};
use crate::error::CliError;
use crate::output::Output;

pub fn run(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let p = cfg.params()?;
    let opts = cfg.scan.as_ref().ok_or_else(|| missing("scan"))?;
    let y = opts
        .y
        .clone()
        .unwrap_or_else(|| Axis::new("eps1", opts.eps1, opts.eps1, 1));
    let res = scan(&p, opts.eps1, &opts.x, &y)?;
    out.write("scan.csv", res.to_csv())?;
    let valid = res.rows.iter().filter(|r| r.valid).count();
    println!("{} cells, {} valid", res.rows.len(), valid);
    Ok(())
}
