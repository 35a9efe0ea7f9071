//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Parameters cross the boundary as JSON objects with the same keys as the
//! `[params]` table of a config file. Results are flat `Float64Array`s.

use wasm_bindgen::prelude::*;

use rinzelkit::certificate::certificate;
use rinzelkit::kernel::{h, heat_kernel};
use rinzelkit::model::{energy, FhrParams, FhrSystem, ModelForm, State};
use rinzelkit::ode::{integrate, IntegratorConfig};

fn params(json: &str) -> Result<FhrParams, String> {
    let p: FhrParams = serde_json::from_str(json).map_err(|e| format!("params: {e}"))?;
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Rows `t, u, w, y, E` at `samples` uniform times on `[0, t_end]`.
pub fn simulate_rows(json: &str, s0: [f64; 3], t_end: f64, samples: usize, tol: f64) -> Result<Vec<f64>, String> {
    if !(t_end > 0.0 && t_end.is_finite()) || samples < 2 {
        return Err("need t_end > 0 and at least two samples".into());
    }
    let sys = FhrSystem::new(params(json)?, ModelForm::General);
    let traj = integrate(&sys, 0.0, t_end, &s0, &IntegratorConfig::with_tol(tol), &[])
        .map_err(|e| e.to_string())?
        .trajectory;
    let mut out = Vec::with_capacity(5 * samples);
    for (t, y) in traj.resample(samples) {
        out.extend_from_slice(&[t, y[0], y[1], y[2], energy(State::from_slice(&y))]);
    }
    Ok(out)
}

/// `log10 C` over an `(a, eps1)` grid, row-major with `a` fastest; NaN
/// where the certificate is not valid.
pub fn scan_grid(json: &str, a: (f64, f64, usize), eps1: (f64, f64, usize)) -> Result<Vec<f64>, String> {
    let base = params(json)?;
    let (xs, es) = (linspace(a.0, a.1, a.2), linspace(eps1.0, eps1.1, eps1.2));
    let mut out = Vec::with_capacity(xs.len() * es.len());
    for &e in &es {
        for &x in &xs {
            let c = certificate(&FhrParams { a: x, ..base }, e).map_err(|e| e.to_string())?;
            out.push(if c.valid { c.c_decay.log10() } else { f64::NAN });
        }
    }
    Ok(out)
}

/// `H(x, t)` at `n` points of `[x_lo, x_hi]`, followed by the heat kernel
/// times `e^{-at}` at the same points.
pub fn kernel_rows(json: &str, t: f64, x_lo: f64, x_hi: f64, n: usize) -> Result<Vec<f64>, String> {
    let p = params(json)?;
    let xs = linspace(x_lo, x_hi, n);
    let mut out = Vec::with_capacity(2 * n);
    for &x in &xs {
        out.push(h(x, t, &p, 1e-9).map_err(|e| e.to_string())?.value);
    }
    out.extend(xs.iter().map(|&x| heat_kernel(x, t, p.diffusion, p.a)));
    Ok(out)
}

#[wasm_bindgen]
pub fn simulate(params: &str, u: f64, w: f64, y: f64, t_end: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    simulate_rows(params, [u, w, y], t_end, samples, 1e-8).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn certificate_scan(
    params: &str,
    a_lo: f64,
    a_hi: f64,
    na: usize,
    eps1_lo: f64,
    eps1_hi: f64,
    ne: usize,
) -> Result<Vec<f64>, JsError> {
    scan_grid(params, (a_lo, a_hi, na), (eps1_lo, eps1_hi, ne)).map_err(|e| JsError::new(&e))
}

/// Certificate summary as JSON, for the readout next to the scan.
#[wasm_bindgen]
pub fn certificate_json(params: &str, eps1: f64) -> Result<String, JsError> {
    let p = self::params(params).map_err(|e| JsError::new(&e))?;
    let c = certificate(&p, eps1).map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&c).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn kernel_profile(params: &str, t: f64, x_lo: f64, x_hi: f64, n: usize) -> Result<Vec<f64>, JsError> {
    kernel_rows(params, t, x_lo, x_hi, n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: &str =
        r#"{"D":1.0,"a":-0.98,"I":0.3125,"eps":0.8,"beta":0.126,"c":0.2,"d":1.0,"h":-0.775,"delta":0.5,"k":3.0}"#;

    #[test]
    fn simulate_starts_at_initial_state() {
        let rows = simulate_rows(REF, [0.1, 0.2, 0.3], 10.0, 11, 1e-8).unwrap();
        assert_eq!(rows.len(), 55);
        assert_eq!(&rows[..4], &[0.0, 0.1, 0.2, 0.3]);
        assert!((rows[4] - 0.5 * (0.01 + 0.04 + 0.09)).abs() < 1e-15);
        assert_eq!(rows[50], 10.0);
        assert!(simulate_rows("{}", [0.0; 3], 1.0, 2, 1e-8).is_err());
    }

    #[test]
    fn scan_valid_only_inside_feasible_band() {
        let g = scan_grid(REF, (-1.1, -0.9, 21), (1e-4, 1e-4, 1)).unwrap();
        assert_eq!(g.len(), 21);
        // a = -0.98 is index 12
        assert!(g[12].is_finite());
        assert!(g[0].is_nan() && g[20].is_nan());
    }

    #[test]
    fn kernel_without_recovery_is_heat_kernel() {
        let p = REF
            .replace(r#""eps":0.8"#, r#""eps":0.0"#)
            .replace(r#""delta":0.5"#, r#""delta":0.0"#);
        let v = kernel_rows(&p, 0.5, -2.0, 2.0, 9).unwrap();
        for i in 0..9 {
            assert!((v[i] - v[9 + i]).abs() < 1e-10);
        }
    }
}
