//! TOML run configuration with `--set key=value` overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use rinzelkit::kernel::{PicardGrid, PicardOptions};
use rinzelkit::model::{FhrParams, State, DEFAULT_CONSTRAINT_TOL, PARAM_KEYS};
use rinzelkit::ode::IntegratorConfig;
use rinzelkit::profile::Profile;
use rinzelkit::scan::Axis;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory; `--out` takes precedence.
    pub out: Option<PathBuf>,
    pub params: Option<FhrParams>,
    pub initial: Option<State>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub simulate: Option<SimulateOpts>,
    pub certify: Option<CertifyOpts>,
    pub scan: Option<ScanOpts>,
    pub first_integral: Option<FirstIntegralOpts>,
    pub kernel: Option<KernelOpts>,
    pub picard: Option<PicardOpts>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOpts {
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Slack of the certificate checked along the run.
    #[serde(default)]
    pub eps1: f64,
    /// Dense-output samples per step used by the check.
    #[serde(default = "default_per_step")]
    pub per_step: usize,
    /// Write this many uniformly spaced samples instead of the step knots.
    pub samples: Option<usize>,
}

fn default_per_step() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyOpts {
    #[serde(default)]
    pub eps1: f64,
    /// Initial energy for the bound and entry time; defaults to the energy
    /// of `[initial]`, or 0.
    #[serde(rename = "E0")]
    pub e0: Option<f64>,
    #[serde(rename = "K0", default = "one")]
    pub k0: f64,
    #[serde(default)]
    pub optimize_eps1: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for CertifyOpts {
    fn default() -> Self {
        CertifyOpts {
            eps1: 0.0,
            e0: None,
            k0: one(),
            optimize_eps1: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOpts {
    #[serde(default)]
    pub eps1: f64,
    pub x: Axis,
    /// Defaults to the single value `eps1`.
    pub y: Option<Axis>,
}

/// Uniform points `lo..=hi`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Span {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let bad = |why: &str| Err(CliError::config(format!("{name}: {why}")));
        if self.n == 0 {
            return bad("needs at least one point");
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return bad("bounds must be finite");
        }
        if self.n == 1 {
            return if self.lo == self.hi {
                Ok(vec![self.lo])
            } else {
                bad("a single point needs lo == hi")
            };
        }
        if !(self.hi > self.lo) {
            return bad("needs lo < hi");
        }
        Ok((0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstIntegralOpts {
    #[serde(rename = "T", default = "hundred")]
    pub horizon: f64,
    /// Initial value of the reduced equation; defaults to `initial.u`.
    pub u0: Option<f64>,
    /// Explicit offsets. Without them the constraints are checked and the
    /// offsets derived from `[initial]`.
    #[serde(rename = "Q1")]
    pub q1: Option<f64>,
    #[serde(rename = "Q2")]
    pub q2: Option<f64>,
    /// Family of `Q1` values integrated with the same `Q2` and `u0`.
    pub sweep: Option<Span>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_constraint_tol")]
    pub constraint_tol: f64,
}

fn hundred() -> f64 {
    100.0
}

fn default_samples() -> usize {
    1001
}

fn default_constraint_tol() -> f64 {
    DEFAULT_CONSTRAINT_TOL
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelOpts {
    pub x: Span,
    pub t: Span,
    #[serde(default = "default_kernel_tol")]
    pub tol: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_kernel_tol() -> f64 {
    1e-10
}

fn default_budget() -> usize {
    rinzelkit::kernel::DEFAULT_BUDGET
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardOpts {
    pub grid: PicardGrid,
    pub u0: Profile,
    #[serde(default)]
    pub w0: Profile,
    #[serde(default)]
    pub y0: Profile,
    #[serde(default)]
    pub options: PicardOptions,
    /// Lines-solver refinement for `--crosscheck`.
    #[serde(default = "default_refine")]
    pub refine: usize,
}

fn default_refine() -> usize {
    4
}

impl RunConfig {
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for s in sets {
            apply_set(&mut table, s)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config(e.message().to_string()))
    }

    pub fn params(&self) -> Result<FhrParams, CliError> {
        self.params.ok_or_else(|| missing("params"))
    }

    pub fn initial(&self) -> Result<State, CliError> {
        let s = self.initial.ok_or_else(|| missing("initial"))?;
        s.validate()?;
        Ok(s)
    }
}

pub fn missing(key: &str) -> CliError {
    CliError::config(format!("missing required key '{key}'"))
}

/// `key=value` with a dotted path; a bare model-constant name such as `a`
/// means `params.a`.
fn apply_set(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got '{spec}'")))?;
    let key = key.trim();
    let path: Vec<&str> = if !key.contains('.') && PARAM_KEYS.contains(&key) {
        vec!["params", key]
    } else {
        key.split('.').collect()
    };
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("--set: malformed key '{key}'")));
    }
    let value = parse_value(raw.trim());
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = table;
    for p in parents {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("--set: '{p}' is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_nested_keys() {
        let mut t: toml::Table = "[params]\na = 1.0\n".parse().unwrap();
        apply_set(&mut t, "a=-0.98").unwrap();
        apply_set(&mut t, "simulate.T=5").unwrap();
        apply_set(&mut t, "integrator.method=implicit").unwrap();
        assert_eq!(t["params"]["a"].as_float(), Some(-0.98));
        assert_eq!(t["simulate"]["T"].as_integer(), Some(5));
        assert_eq!(t["integrator"]["method"].as_str(), Some("implicit"));
        assert!(apply_set(&mut t, "novalue").is_err());
    }

    #[test]
    fn absent_certify_section_matches_empty_one() {
        let empty: CertifyOpts = toml::Table::new().try_into().unwrap();
        let d = CertifyOpts::default();
        assert_eq!(
            (d.eps1, d.e0, d.k0, d.optimize_eps1),
            (empty.eps1, empty.e0, empty.k0, empty.optimize_eps1)
        );
        assert_eq!(d.k0, 1.0);
    }

    #[test]
    fn spans() {
        let s = Span {
            lo: -1.0,
            hi: 1.0,
            n: 5,
        };
        assert_eq!(s.values("x").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(Span { lo: 1.0, hi: 0.0, n: 3 }.values("x").is_err());
        assert_eq!(Span { lo: 2.0, hi: 2.0, n: 1 }.values("x").unwrap(), vec![2.0]);
    }
}
