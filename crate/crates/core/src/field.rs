//! Space-time fields and their CSV / binary dumps.
//!
//! Binary layout (all integers `u32`, all floats `f64`, little-endian):
//!
//! ```text
//! "RZKF"  version(=1)  nx  nt  nfields
//! nfields x { name_len  name (UTF-8) }
//! xs[nx]  ts[nt]
//! nfields x values[nx * nt]      row-major in (x, t): index i * nt + j
//! ```

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::io::fmt_f64;

pub const MAGIC: &[u8; 4] = b"RZKF";
pub const VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("not a field dump (bad magic)")]
    Magic,
    #[error("unsupported field dump version {0}")]
    Version(u32),
    #[error("field dump truncated")]
    Truncated,
    #[error("field name is not UTF-8")]
    Name,
    #[error("field '{name}' has {got} values, expected {want}")]
    Shape { name: String, got: usize, want: usize },
}

/// Named fields on a tensor grid, row-major in `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSet {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub fields: Vec<(String, Vec<f64>)>,
}

impl FieldSet {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>) -> Self {
        FieldSet {
            xs,
            ts,
            fields: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) -> Result<(), FieldError> {
        let want = self.xs.len() * self.ts.len();
        if values.len() != want {
            return Err(FieldError::Shape {
                name: name.to_string(),
                got: values.len(),
                want,
            });
        }
        self.fields.push((name.to_string(), values));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Long-format CSV `x,t,value` of one field.
    pub fn to_csv(&self, name: &str) -> Option<String> {
        let v = self.get(name)?;
        let nt = self.ts.len();
        let mut out = String::from("x,t,value\n");
        for (i, x) in self.xs.iter().enumerate() {
            for (j, t) in self.ts.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", fmt_f64(*x), fmt_f64(*t), fmt_f64(v[i * nt + j]));
            }
        }
        Some(out)
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        for n in [
            VERSION,
            self.xs.len() as u32,
            self.ts.len() as u32,
            self.fields.len() as u32,
        ] {
            out.extend_from_slice(&n.to_le_bytes());
        }
        for (name, _) in &self.fields {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
        }
        let floats = self
            .xs
            .iter()
            .chain(&self.ts)
            .chain(self.fields.iter().flat_map(|(_, v)| v));
        for v in floats {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self, FieldError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(FieldError::Magic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(FieldError::Version(version));
        }
        let (nx, nt, nf) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
        let mut names = Vec::with_capacity(nf);
        for _ in 0..nf {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?).map_err(|_| FieldError::Name)?;
            names.push(name.to_string());
        }
        let xs = r.f64s(nx)?;
        let ts = r.f64s(nt)?;
        let mut set = FieldSet::new(xs, ts);
        for name in names {
            let v = r.f64s(nx * nt)?;
            set.fields.push((name, v));
        }
        Ok(set)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FieldError> {
        let end = self.pos.checked_add(n).ok_or(FieldError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(FieldError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, FieldError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, FieldError> {
        let raw = self.take(n.checked_mul(8).ok_or(FieldError::Truncated)?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Which solver produced a [`PdeSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PdeMethod {
    Picard,
    Lines,
}

/// `(u, w, y)` on an `(x, t)` grid, row-major in `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeSolution {
    pub method: PdeMethod,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    /// Sup-norm update of each Picard sweep (empty for the lines solver).
    pub residuals: Vec<f64>,
    /// Picard: the last update met the tolerance. Always true for lines.
    pub converged: bool,
}

impl PdeSolution {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ts.len() + j
    }

    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[self.index(i, j)]
    }

    /// Ratios of successive residuals from the second sweep on.
    pub fn residual_ratios(&self) -> Vec<f64> {
        self.residuals
            .windows(2)
            .skip(1)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// Largest measured contraction ratio, if at least two nonzero updates
    /// follow the first sweep.
    pub fn contraction_ratio(&self) -> Option<f64> {
        self.residual_ratios().into_iter().reduce(f64::max)
    }

    pub fn fields(&self) -> FieldSet {
        let mut set = FieldSet::new(self.xs.clone(), self.ts.clone());
        set.fields.push(("u".into(), self.u.clone()));
        if let Some(w) = &self.w {
            set.fields.push(("w".into(), w.clone()));
        }
        if let Some(y) = &self.y {
            set.fields.push(("y".into(), y.clone()));
        }
        set
    }

    /// `max |u - other.u|` over the nodes of `self` whose `(x, t)` also
    /// appear in `other` (to a relative 1e-9 of the spacing).
    pub fn sup_gap(&self, other: &PdeSolution) -> Option<f64> {
        let map = |a: &[f64], b: &[f64]| -> Vec<Option<usize>> {
            let scale = b.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let eps = if scale.is_finite() { 1e-9 * scale } else { 1e-12 };
            a.iter().map(|v| b.iter().position(|q| (q - v).abs() <= eps)).collect()
        };
        let mx = map(&self.xs, &other.xs);
        let mt = map(&self.ts, &other.ts);
        let mut gap: Option<f64> = None;
        for (i, oi) in mx.iter().enumerate() {
            for (j, oj) in mt.iter().enumerate() {
                if let (Some(oi), Some(oj)) = (oi, oj) {
                    let d = (self.u_at(i, j) - other.u_at(*oi, *oj)).abs();
                    gap = Some(gap.map_or(d, |g| g.max(d)));
                }
            }
        }
        gap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FieldSet {
        let mut s = FieldSet::new(vec![-1.0, 0.0, 1.0], vec![0.0, 0.5]);
        s.push("u", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0 + 1e-17]).unwrap();
        s.push("h1", vec![0.1, 0.2, 0.3, 0.4, 0.5, 1.0 / 3.0]).unwrap();
        s
    }

    #[test]
    fn binary_round_trip() {
        let s = sample();
        let bytes = s.to_binary();
        assert_eq!(&bytes[..4], MAGIC);
        assert_eq!(FieldSet::from_binary(&bytes).unwrap(), s);
        assert_eq!(
            FieldSet::from_binary(&bytes[..bytes.len() - 1]),
            Err(FieldError::Truncated)
        );
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(FieldSet::from_binary(&bad), Err(FieldError::Magic));
    }

    #[test]
    fn csv_long_format() {
        let csv = sample().to_csv("u").unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,t,value");
        assert_eq!(lines.len(), 7);
        let f: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(f, vec![-1.0, 0.5, 2.0]);
        assert!(sample().to_csv("v").is_none());
    }

    #[test]
    fn shape_checked() {
        let mut s = FieldSet::new(vec![0.0], vec![0.0, 1.0]);
        assert!(matches!(s.push("u", vec![1.0]), Err(FieldError::Shape { .. })));
    }

    #[test]
    fn gap_on_shared_nodes() {
        let a = PdeSolution {
            method: PdeMethod::Picard,
            xs: vec![0.0, 1.0],
            ts: vec![0.0, 1.0],
            u: vec![0.0, 1.0, 2.0, 3.0],
            w: None,
            y: None,
            residuals: vec![1.0, 0.5, 0.1, 0.05],
            converged: true,
        };
        let b = PdeSolution {
            method: PdeMethod::Lines,
            xs: vec![0.0, 0.5, 1.0],
            ts: vec![0.0, 1.0],
            u: vec![0.0, 1.0, 9.0, 9.0, 2.0, 3.5],
            ..a.clone()
        };
        assert_eq!(a.sup_gap(&b), Some(0.5));
        assert_eq!(a.residual_ratios(), vec![0.2, 0.5]);
        assert_eq!(a.contraction_ratio(), Some(0.5));
    }
}
