//! Recompute every number of the worked example and set it beside the
//! quoted value. Disagreements are reported, never reconciled.

use std::fmt::Write as _;

use serde::Serialize;

use crate::certificate::{admissible_eps1, certificate, feasible_a_interval, margins, CertError};
use crate::model::FhrParams;

/// One computed-versus-quoted comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub id: &'static str,
    pub description: &'static str,
    pub computed: f64,
    /// Value as printed, verbatim.
    pub quoted_text: &'static str,
    pub quoted: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    /// Absolute tolerance implied by the printed digits.
    pub tolerance: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationReport {
    pub params: FhrParams,
    pub rows: Vec<Row>,
    pub notes: Vec<&'static str>,
}

impl ReplicationReport {
    pub fn row(&self, id: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.agrees)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>24} {:>24} {:>11} {:>11}  status",
            "id", "computed", "quoted", "abs diff", "rel diff"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<14} {:>24.16e} {:>24} {:>11.3e} {:>11.3e}  {}",
                r.id,
                r.computed,
                r.quoted_text,
                r.abs_diff,
                r.rel_diff,
                if r.agrees { "agrees" } else { "DISAGREES" }
            );
            let _ = writeln!(out, "{:<14} {}", "", r.description);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

fn row(id: &'static str, description: &'static str, computed: f64, quoted_text: &'static str, tolerance: f64) -> Row {
    let quoted: f64 = quoted_text.parse().expect("quoted literal");
    let abs_diff = (computed - quoted).abs();
    let rel_diff = if quoted != 0.0 {
        abs_diff / quoted.abs()
    } else {
        abs_diff
    };
    Row {
        id,
        description,
        computed,
        quoted_text,
        quoted,
        abs_diff,
        rel_diff,
        tolerance,
        agrees: abs_diff <= tolerance,
    }
}

/// Half a unit in the last printed place of `text`.
fn half_ulp(text: &str) -> f64 {
    let mant = text.split(['e', 'E']).next().unwrap_or(text);
    let exp: i32 = text
        .split_once(['e', 'E'])
        .map(|(_, e)| e.parse().unwrap_or(0))
        .unwrap_or(0);
    let decimals = mant.split_once('.').map_or(0, |(_, d)| d.len()) as i32;
    0.5 * 10f64.powi(exp - decimals)
}

fn quoted(id: &'static str, description: &'static str, computed: f64, text: &'static str) -> Row {
    row(id, description, computed, text, half_ulp(text))
}

/// The worked example: reference parameters with `a` scanned over the quoted values.
pub fn replicate() -> Result<ReplicationReport, CertError> {
    let base = FhrParams::reference_set(-0.98, 0.0);
    let m = margins(&base)?;
    let iv = feasible_a_interval(&base)?.ok_or(CertError::Infeasible(m.min()))?;
    let mut rows = vec![
        quoted("eta", "eta = beta eps", base.eta(), "0.1008"),
        quoted("gamma", "gamma = delta d", base.gamma(), "0.5"),
        quoted("half_eps", "|1 - eps| / 2", (1.0 - base.eps).abs() / 2.0, "0.1"),
        quoted("half_delta", "|1 - delta| / 2", (1.0 - base.delta).abs() / 2.0, "0.25"),
        quoted(
            "min_margin",
            "min(eta - |eps-1|/2, gamma - |1-delta|/2), the constant inside C",
            (base.eta() - (base.eps - 1.0).abs() / 2.0).min(base.gamma() - (1.0 - base.delta).abs() / 2.0),
            "0.0008",
        ),
        quoted(
            "a_lo",
            "lower end of the feasible a interval, -1 - sqrt(3)/75",
            iv.lo,
            "-1.023094011",
        ),
        quoted(
            "a_hi",
            "upper end of the feasible a interval, -1 + sqrt(3)/75",
            iv.hi,
            "-0.9769059892",
        ),
        quoted("a_lo_12", "lower end, twelve-digit quote", iv.lo, "-1.023094010768"),
        quoted("a_hi_13", "upper end, thirteen-digit quote", iv.hi, "-0.9769059892324"),
    ];
    let at98 = admissible_eps1(&base)?;
    rows.push(quoted(
        "eps1_hi",
        "upper end of the admissible eps1 interval at a = -0.98",
        at98.upper,
        "0.0002",
    ));

    // the absorbing-set magnitude example
    let a_edge = -0.9769059892;
    let p_edge = FhrParams { a: a_edge, ..base };
    let m_edge = margins(&p_edge)?;
    rows.push(quoted(
        "C_bracket",
        "half of C at eps1 = 0 for a = -0.9769059892, i.e. min(f, g); quoted as the bracket of C",
        m_edge.min(),
        "0.00719999999998",
    ));
    rows.push(quoted(
        "C_quoted_arith",
        "2 (0.00719999999998 - 0.007199999997) from the quoted bracket and slack",
        2.0 * (0.00719999999998 - 0.007199999997),
        "1.999999125e-12",
    ));
    let c_edge = certificate(&p_edge, 0.007199999997)?;
    rows.push(quoted(
        "C_edge",
        "C at a = -0.9769059892, eps1 = 0.007199999997 from the C formula",
        c_edge.c_decay,
        "1.999999125e-12",
    ));
    let p_c1 = FhrParams {
        a: -1.0230940107,
        ..base
    };
    let c1 = certificate(&p_c1, 0.0)?.c_src;
    rows.push(quoted("C1", "C1 at a = -1.0230940107, eps1 = 0", c1, "85.7089051"));
    rows.push(quoted(
        "R_quoted",
        "sqrt(2 C1 / C) from the quoted C1 = 85.7089051 and C = 2e-12",
        (2.0 * 85.7089051 / 2e-12f64).sqrt(),
        "9.2579e6",
    ));
    rows.push(quoted(
        "R_quoted_full",
        "sqrt(2 C1 / C) from the quoted C1 = 85.7089051 and C = 1.999999125e-12",
        (2.0 * 85.7089051 / 1.999999125e-12f64).sqrt(),
        "9.2579e6",
    ));
    rows.push(quoted(
        "R_computed_C1",
        "sqrt(2 C1 / C) from the recomputed C1 and C = 2e-12",
        (2.0 * c1 / 2e-12f64).sqrt(),
        "9.2579e6",
    ));
    Ok(ReplicationReport {
        params: base,
        rows,
        notes: vec![
            "C1 and the magnitude example use two different values of a (-1.0230940107 and -0.9769059892), matching the quotes.",
            "At a = -0.9769059892 the recomputed min(f, g) is about -2.2e-12: that a lies just outside the open feasible interval, so the certificate there is not valid.",
            "The quoted bracket 0.00719999999998 does not follow from 0.0008 - 1.5 (a+1)^2; both values are shown.",
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_digits_give_tolerances() {
        assert_eq!(half_ulp("0.1008"), 0.00005);
        assert!((half_ulp("9.2579e6") - 50.0).abs() < 1e-9);
        assert_eq!(half_ulp("0.5"), 0.05);
    }

    #[test]
    fn report_flags_and_agrees() {
        let r = replicate().unwrap();
        for id in [
            "eta",
            "gamma",
            "a_lo",
            "a_hi",
            "a_lo_12",
            "a_hi_13",
            "eps1_hi",
            "R_quoted",
            "min_margin",
        ] {
            assert!(r.row(id).unwrap().agrees, "{id}");
        }
        assert_eq!(r.row("eta").unwrap().computed, 0.1008);
        assert_eq!(r.row("gamma").unwrap().computed, 0.5);
        let c1 = r.row("C1").unwrap();
        assert!(!c1.agrees);
        assert!((c1.computed - 89.39695438707257).abs() < 1e-9 * 89.4);
        assert!(!r.row("C_bracket").unwrap().agrees);
        let text = r.to_text();
        assert!(text.contains("DISAGREES"));
        assert!(text.contains("85.7089051"));
    }

    #[test]
    fn magnitude_from_quoted_constants() {
        let r = replicate().unwrap();
        let row = r.row("R_quoted").unwrap();
        assert!((row.computed - 9257910.40678186731824528544139488).abs() < 1e-6);
    }
}
