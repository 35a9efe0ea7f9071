//! Certificate maps over two-parameter grids.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{certificate, CertError};
use crate::io::fmt_f64;
use crate::model::{FhrParams, PARAM_KEYS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("degenerate grid axis '{key}': {why}")]
    Degenerate { key: String, why: &'static str },
    #[error("unknown scan key '{0}' (expected eps1 or one of D, a, I, eps, beta, c, d, h, delta, k)")]
    UnknownKey(String),
    #[error("both axes scan '{0}'")]
    SameKey(String),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("malformed scan row {line}: {why}")]
    Parse { line: usize, why: String },
}

/// Uniform axis `lo..=hi` with `n` points; `n = 1` means the single value
/// `lo` (and requires `hi == lo`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(key: &str, lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            key: key.to_string(),
            lo,
            hi,
            n,
        }
    }

    fn validate(&self) -> Result<(), ScanError> {
        let bad = |why| {
            Err(ScanError::Degenerate {
                key: self.key.clone(),
                why,
            })
        };
        if self.key != "eps1" && !PARAM_KEYS.contains(&self.key.as_str()) {
            return Err(ScanError::UnknownKey(self.key.clone()));
        }
        if self.n == 0 {
            return bad("needs at least one point");
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return bad("bounds must be finite");
        }
        if self.n == 1 && self.lo != self.hi {
            return bad("a single point needs lo == hi");
        }
        if self.n > 1 && !(self.hi > self.lo) {
            return bad("needs lo < hi");
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.lo
        } else if i + 1 == self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub a: f64,
    pub eps1: f64,
    pub f: f64,
    pub g: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub ratio: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub x: Axis,
    pub y: Axis,
    /// Row-major in `(x, y)`: `rows[i * y.n + j]`.
    pub rows: Vec<ScanRow>,
    /// Values of any scanned model parameters other than `a`.
    pub extra: Vec<(String, Vec<f64>)>,
}

fn cell(base: &FhrParams, eps1: f64, x: (&str, f64), y: (&str, f64)) -> Result<ScanRow, CertError> {
    let mut p = *base;
    let mut e = eps1;
    for (key, v) in [x, y] {
        if key == "eps1" {
            e = v;
        } else {
            p = p.with(key, v).expect("validated key");
        }
    }
    let cert = certificate(&p, e)?;
    Ok(ScanRow {
        a: p.a,
        eps1: e,
        f: cert.f,
        g: cert.g,
        c: cert.c_decay,
        c1: cert.c_src,
        ratio: cert.ratio(),
        valid: cert.valid,
    })
}

/// Evaluate the certificate on every cell of `x` by `y`; keys not scanned
/// take their values from `base` and `eps1`.
pub fn scan(base: &FhrParams, eps1: f64, x: &Axis, y: &Axis) -> Result<ScanResult, ScanError> {
    x.validate()?;
    y.validate()?;
    if x.key == y.key {
        return Err(ScanError::SameKey(x.key.clone()));
    }
    let cells: Vec<(usize, usize)> = (0..x.n).flat_map(|i| (0..y.n).map(move |j| (i, j))).collect();
    let eval = |&(i, j): &(usize, usize)| cell(base, eps1, (&x.key, x.value(i)), (&y.key, y.value(j)));
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<ScanRow>, CertError> = {
        use rayon::prelude::*;
        cells.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<ScanRow>, CertError> = cells.iter().map(eval).collect();
    let rows = rows?;

    let mut extra = Vec::new();
    for (first, ax) in [(true, x), (false, y)] {
        if ax.key != "a" && ax.key != "eps1" {
            let vals = cells
                .iter()
                .map(|&(i, j)| ax.value(if first { i } else { j }))
                .collect();
            extra.push((ax.key.clone(), vals));
        }
    }
    Ok(ScanResult {
        x: x.clone(),
        y: y.clone(),
        rows,
        extra,
    })
}

impl ScanResult {
    /// CSV with header `a,eps1,f,g,C,C1,ratio,valid`, preceded by one column
    /// per scanned parameter other than `a`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, _) in &self.extra {
            out.push_str(k);
            out.push(',');
        }
        out.push_str("a,eps1,f,g,C,C1,ratio,valid\n");
        for (n, r) in self.rows.iter().enumerate() {
            for (_, v) in &self.extra {
                out.push_str(&fmt_f64(v[n]));
                out.push(',');
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(r.a),
                fmt_f64(r.eps1),
                fmt_f64(r.f),
                fmt_f64(r.g),
                fmt_f64(r.c),
                fmt_f64(r.c1),
                fmt_f64(r.ratio),
                r.valid
            );
        }
        out
    }
}

/// Parse the trailing eight columns of a scan CSV back into rows.
pub fn parse_csv(text: &str) -> Result<Vec<ScanRow>, ScanError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ScanError::Parse {
        line: 1,
        why: "empty file".into(),
    })?;
    let skip = header.split(',').count().saturating_sub(8);
    let mut rows = Vec::new();
    for (ln, line) in lines {
        let bad = |why: String| ScanError::Parse { line: ln + 1, why };
        let fields: Vec<&str> = line.split(',').skip(skip).collect();
        if fields.len() != 8 {
            return Err(bad(format!("expected 8 fields, got {}", fields.len())));
        }
        let num = |i: usize| {
            fields[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("field {}: {e}", i + 1)))
        };
        rows.push(ScanRow {
            a: num(0)?,
            eps1: num(1)?,
            f: num(2)?,
            g: num(3)?,
            c: num(4)?,
            c1: num(5)?,
            ratio: num(6)?,
            valid: fields[7].parse().map_err(|e| bad(format!("field 8: {e}")))?,
        });
    }
    Ok(rows)
}
