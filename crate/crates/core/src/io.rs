//! CSV helpers shared by the exporters.

use std::fmt::Write as _;

use crate::ode::Trajectory;

/// 17 significant digits; parses back to the same double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trajectory samples as CSV. Three-component trajectories get the header
/// `t,u,w,y`, anything else `t,x1,...,xn`.
pub fn trajectory_csv<'a>(dim: usize, rows: impl IntoIterator<Item = (f64, &'a [f64])>) -> String {
    let mut out = String::from("t");
    if dim == 3 {
        out.push_str(",u,w,y");
    } else {
        for i in 1..=dim {
            let _ = write!(out, ",x{i}");
        }
    }
    out.push('\n');
    for (t, y) in rows {
        out.push_str(&fmt_f64(t));
        for v in y {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

impl Trajectory {
    /// Accepted-step samples as CSV.
    pub fn to_csv(&self) -> String {
        trajectory_csv(self.dim(), self.samples())
    }
}

/// Parse a CSV produced by [`trajectory_csv`] into `(t, state)` rows.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<(f64, Vec<f64>)>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let cols = header.split(',').count();
    if cols < 2 || !header.starts_with("t,") {
        return Err(format!("unexpected header '{header}'"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| format!("line {}: {e}", i + 2))?;
            if vals.len() != cols {
                return Err(format!("line {}: expected {cols} fields", i + 2));
            }
            Ok((vals[0], vals[1..].to_vec()))
        })
        .collect()
}
