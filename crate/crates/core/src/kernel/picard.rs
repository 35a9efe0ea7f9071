//! Picard iteration of the integral representation
//!
//! ```text
//! u(x,t) = int H(x-xi, t) u0(xi) dxi
//!        + int_0^t dtau int H(x-xi, t-tau) F(xi, tau, u(xi,tau)) dxi
//! ```
//!
//! on `[-L, L]` with uniform nodes. Space integrals use the nodal rule with
//! point-sampled kernel tables `dx H(s dx, l dt)`; the time integral uses
//! the trapezoid rule, with `H(., 0)` acting as the identity.

use serde::{Deserialize, Serialize};

use crate::field::{PdeMethod, PdeSolution};
use crate::model::FhrParams;
use crate::profile::Profile;

use super::source::{source_f, SourceContext};
use super::{h_with_budget, KernelError, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardGrid {
    /// Half-width `L` of the truncated domain.
    #[serde(rename = "L")]
    pub half_width: f64,
    pub dx: f64,
    /// Horizon `T`.
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Number of time steps on `[0, T]`.
    pub steps: usize,
}

impl PicardGrid {
    pub fn nodes(&self) -> Result<usize, KernelError> {
        let bad = |m: &str| Err(KernelError::Domain(m.to_string()));
        if !(self.half_width > 0.0 && self.dx > 0.0 && self.horizon > 0.0)
            || !(self.half_width.is_finite() && self.horizon.is_finite())
        {
            return bad("grid needs L > 0, dx > 0, T > 0");
        }
        if self.steps == 0 {
            return bad("grid needs at least one time step");
        }
        let cells = 2.0 * self.half_width / self.dx;
        let n = cells.round();
        if (cells - n).abs() > 1e-9 * cells || n < 2.0 {
            return bad("2L/dx must be an integer of at least 2");
        }
        Ok(n as usize + 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        let n = self.nodes().unwrap_or(0);
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.half_width
                } else {
                    -self.half_width + i as f64 * self.dx
                }
            })
            .collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        let dt = self.horizon / self.steps as f64;
        (0..=self.steps)
            .map(|j| if j == self.steps { self.horizon } else { j as f64 * dt })
            .collect()
    }
}

/// How data outside `[-L, L]` is extended inside the convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    Zero,
    /// Boundary values continued outwards (matches zero-flux walls when the
    /// solution is flat near them).
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardOptions {
    /// Stop when the sup-norm update falls to this; also bounds the
    /// heat-kernel mass outside the domain.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Absolute error per kernel-table entry.
    pub kernel_tol: f64,
    pub budget: usize,
    pub extension: Extension,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: 1e-10,
            max_sweeps: 100,
            kernel_tol: 1e-10,
            budget: DEFAULT_BUDGET,
            extension: Extension::Constant,
        }
    }
}

/// Lag tables `dx H(s dx, l dt)` for `l = 1..=steps`, `s = 0..=2(N-1)`,
/// with suffix sums for the boundary extension.
struct Tables {
    n: usize,
    kern: Vec<Vec<f64>>,
    tail: Vec<Vec<f64>>,
}

impl Tables {
    fn build(p: &FhrParams, grid: &PicardGrid, n: usize, opts: &PicardOptions) -> Result<Self, KernelError> {
        let dt = grid.horizon / grid.steps as f64;
        let width = 2 * (n - 1) + 1;
        let nodes: Vec<(usize, usize)> = (1..=grid.steps).flat_map(|l| (0..width).map(move |s| (l, s))).collect();
        let eval = |&(l, s): &(usize, usize)| {
            h_with_budget(s as f64 * grid.dx, l as f64 * dt, p, opts.kernel_tol, opts.budget).map(|v| grid.dx * v.value)
        };
        let flat = crate::par::map(&nodes, eval)?;
        let kern: Vec<Vec<f64>> = flat.chunks(width).map(|c| c.to_vec()).collect();
        let tail = kern
            .iter()
            .map(|k| {
                let mut t = vec![0.0; width + 1];
                for s in (0..width).rev() {
                    t[s] = t[s + 1] + k[s];
                }
                t
            })
            .collect();
        Ok(Tables { n, kern, tail })
    }

    /// `sum_k dx H(x_i - x_k, l dt) g_k`, plus the extension beyond the walls.
    fn conv(&self, lag: usize, g: &[f64], i: usize, ext: Extension) -> f64 {
        let k = &self.kern[lag - 1];
        let mut acc = 0.0;
        for (m, gm) in g.iter().enumerate() {
            acc += k[i.abs_diff(m)] * gm;
        }
        if ext == Extension::Constant {
            let t = &self.tail[lag - 1];
            acc += g[0] * t[i + 1] + g[self.n - 1] * t[self.n - i];
        }
        acc
    }
}

fn tail_mass(p: &FhrParams, grid: &PicardGrid) -> f64 {
    let z = grid.half_width / (2.0 * (p.diffusion * grid.horizon).sqrt());
    libm::erfc(z) * (-p.a * grid.horizon).exp().max(1.0)
}

/// Picard solve with an arbitrary source `F(x, t, u)`; `u0` is sampled on
/// the grid nodes. `w`, `y` are not reconstructed.
pub fn picard_solve_with<F>(
    kernel_params: &FhrParams,
    u0: &[f64],
    source: F,
    grid: &PicardGrid,
    opts: &PicardOptions,
) -> Result<PdeSolution, KernelError>
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    kernel_params.validate()?;
    let n = grid.nodes()?;
    if u0.len() != n {
        return Err(KernelError::Domain(format!(
            "u0 has {} samples, grid has {n} nodes",
            u0.len()
        )));
    }
    if !(opts.tol > 0.0 && opts.kernel_tol > 0.0) || opts.max_sweeps == 0 {
        return Err(KernelError::Domain(
            "Picard options need tol > 0, kernel_tol > 0, max_sweeps >= 1".into(),
        ));
    }
    if !(kernel_params.diffusion > 0.0) {
        return Err(KernelError::Domain("D must be positive".into()));
    }
    let mass = tail_mass(kernel_params, grid);
    if mass > opts.tol {
        return Err(KernelError::DomainSize { mass, tol: opts.tol });
    }
    let xs = grid.xs();
    let ts = grid.ts();
    let nt = grid.steps;
    let dt = grid.horizon / nt as f64;
    let tables = Tables::build(kernel_params, grid, n, opts)?;
    let ext = opts.extension;

    // time-major: u[j * n + i]
    let cells: Vec<(usize, usize)> = (1..=nt).flat_map(|j| (0..n).map(move |i| (j, i))).collect();
    let hom_rest = crate::par::map(&cells, |&(j, i)| Ok::<_, KernelError>(tables.conv(j, u0, i, ext)))?;
    let mut hom = u0.to_vec();
    hom.extend(hom_rest);

    let mut u = hom.clone();
    let mut residuals = Vec::new();
    let mut growth = 0;
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let f: Vec<f64> = (0..=nt)
            .flat_map(|j| (0..n).map(move |i| (j, i)))
            .map(|(j, i)| source(xs[i], ts[j], u[j * n + i]))
            .collect();
        if let Some(pos) = f.iter().position(|v| !v.is_finite()) {
            return Err(KernelError::Domain(format!(
                "source is not finite at x = {}, t = {}",
                xs[pos % n],
                ts[pos / n]
            )));
        }
        let next_rest = crate::par::map(&cells, |&(j, i)| {
            // trapezoid over tau_m = m dt, m = 0..=j
            let mut acc = 0.5 * tables.conv(j, &f[..n], i, ext) + 0.5 * f[j * n + i];
            for m in 1..j {
                acc += tables.conv(j - m, &f[m * n..(m + 1) * n], i, ext);
            }
            Ok::<_, KernelError>(hom[j * n + i] + dt * acc)
        })?;
        let update = next_rest
            .iter()
            .zip(&u[n..])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        u[n..].copy_from_slice(&next_rest);
        if !update.is_finite() {
            return Err(KernelError::Divergence {
                last: update,
                log: residuals,
            });
        }
        if residuals.last().is_some_and(|&r| update > r) {
            growth += 1;
        } else {
            growth = 0;
        }
        residuals.push(update);
        if growth >= 3 {
            return Err(KernelError::Divergence {
                last: update,
                log: residuals,
            });
        }
        if update <= opts.tol {
            converged = true;
            break;
        }
    }
    let nx = n;
    let mut out = vec![0.0; nx * (nt + 1)];
    for j in 0..=nt {
        for i in 0..nx {
            out[i * (nt + 1) + j] = u[j * n + i];
        }
    }
    Ok(PdeSolution {
        method: PdeMethod::Picard,
        xs,
        ts,
        u: out,
        w: None,
        y: None,
        residuals,
        converged,
    })
}

/// Solve for `u` with the model source and reconstruct `w`, `y` from their
/// linear equations by variation of constants (trapezoid rule in time):
///
/// ```text
/// w = w_free + eps   int_0^t e^{-eta (t-s)}   u ds
/// y = y_free - delta int_0^t e^{-gamma (t-s)} u ds
/// ```
pub fn picard_solve(
    u0: &Profile,
    ctx: &SourceContext,
    grid: &PicardGrid,
    opts: &PicardOptions,
) -> Result<PdeSolution, KernelError> {
    u0.validate().map_err(|e| KernelError::Domain(format!("u0: {e}")))?;
    let xs = grid.xs();
    grid.nodes()?;
    let samples = u0.sample(&xs);
    let mut sol = picard_solve_with(ctx.params(), &samples, |x, t, u| source_f(u, x, t, ctx), grid, opts)?;
    let p = ctx.params();
    let nt = sol.ts.len();
    let dt = grid.horizon / grid.steps as f64;
    let mut w = vec![0.0; sol.u.len()];
    let mut y = vec![0.0; sol.u.len()];
    for (i, &x) in xs.iter().enumerate() {
        let row = &sol.u[i * nt..(i + 1) * nt];
        for (j, &t) in sol.ts.iter().enumerate() {
            let (mut mw, mut my) = (0.0, 0.0);
            for m in 0..=j {
                let wt = if m == 0 || m == j { 0.5 } else { 1.0 };
                let lag = (j - m) as f64 * dt;
                mw += wt * (-p.eta() * lag).exp() * row[m];
                my += wt * (-p.gamma() * lag).exp() * row[m];
            }
            if j == 0 {
                mw = 0.0;
                my = 0.0;
            }
            w[i * nt + j] = ctx.w_free(x, t) + p.eps * dt * mw;
            y[i * nt + j] = ctx.y_free(x, t) - p.delta * dt * my;
        }
    }
    sol.w = Some(w);
    sol.y = Some(y);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FhrParams {
        FhrParams {
            k: 1.0,
            ..FhrParams::reference_set(-0.98, 1.0)
        }
    }

    fn grid() -> PicardGrid {
        PicardGrid {
            half_width: 4.0,
            dx: 0.2,
            horizon: 0.1,
            steps: 10,
        }
    }

    #[test]
    fn zero_source_is_one_application() {
        let g = grid();
        let u0: Vec<f64> = g.xs().iter().map(|x| (-x * x).exp()).collect();
        let sol = picard_solve_with(&params(), &u0, |_, _, _| 0.0, &g, &PicardOptions::default()).unwrap();
        assert_eq!(sol.residuals, vec![0.0]);
        assert!(sol.converged);
        // u = H * u0 at the first step, direct sum
        let p = params();
        let dt = g.horizon / g.steps as f64;
        let xs = g.xs();
        let i = 20;
        let direct: f64 = xs
            .iter()
            .zip(&u0)
            .map(|(xk, uk)| g.dx * super::super::h(xs[i] - xk, dt, &p, 1e-12).unwrap().value * uk)
            .sum::<f64>();
        // the constant extension adds the (negligible) boundary tails
        assert!((sol.u_at(i, 1) - direct).abs() < 1e-9);
    }

    #[test]
    fn zero_data_no_offsets_gives_zero() {
        let p = FhrParams {
            current: 0.0,
            c: 0.0,
            h: 0.0,
            ..params()
        };
        let ctx = SourceContext::new(p, Profile::zero(), Profile::zero()).unwrap();
        let sol = picard_solve(&Profile::zero(), &ctx, &grid(), &PicardOptions::default()).unwrap();
        assert!(sol.u.iter().all(|v| *v == 0.0));
        assert!(sol.w.unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn residuals_contract() {
        let ctx = SourceContext::new(params(), Profile::zero(), Profile::zero()).unwrap();
        let u0 = Profile::Gaussian {
            amplitude: 1.0,
            center: 0.0,
            width: 0.7,
        };
        let sol = picard_solve(&u0, &ctx, &grid(), &PicardOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.residuals.len() >= 3);
        for w in sol.residuals.windows(2).skip(1) {
            assert!(w[1] <= w[0]);
        }
        assert!(sol.contraction_ratio().unwrap() < 0.5);
    }

    #[test]
    fn reconstructed_slow_fields_solve_their_equations() {
        let ctx = SourceContext::new(params(), Profile::Constant { value: 0.2 }, Profile::zero()).unwrap();
        let u0 = Profile::Constant { value: 0.5 };
        let sol = picard_solve(&u0, &ctx, &grid(), &PicardOptions::default()).unwrap();
        let p = ctx.params();
        let w = sol.w.as_ref().unwrap();
        let nt = sol.ts.len();
        let dt = sol.ts[1];
        // centred difference of w against eps(-beta w + c + u) in the middle
        let i = 10;
        for j in 1..nt - 1 {
            let k = i * nt + j;
            let dw = (w[k + 1] - w[k - 1]) / (2.0 * dt);
            let rhs = p.eps * (-p.beta * w[k] + p.c + sol.u[k]);
            assert!((dw - rhs).abs() < 1e-4, "j {j}: {dw} vs {rhs}");
        }
        assert_eq!(w[i * nt], 0.2);
    }

    #[test]
    fn growing_updates_are_divergence() {
        let g = PicardGrid {
            half_width: 20.0,
            dx: 1.0,
            horizon: 2.0,
            steps: 8,
        };
        let u0 = vec![1.0; g.nodes().unwrap()];
        let err =
            picard_solve_with(&params(), &u0, |_, _, u| 4.0 * u * u * u, &g, &PicardOptions::default()).unwrap_err();
        assert!(matches!(err, KernelError::Divergence { .. }), "{err:?}");
    }

    #[test]
    fn small_domain_rejected() {
        let g = PicardGrid {
            half_width: 1.0,
            dx: 0.1,
            horizon: 0.25,
            steps: 5,
        };
        let u0 = vec![0.0; g.nodes().unwrap()];
        let err = picard_solve_with(&params(), &u0, |_, _, _| 0.0, &g, &PicardOptions::default()).unwrap_err();
        assert!(matches!(err, KernelError::DomainSize { .. }));
    }

    #[test]
    fn grid_checks() {
        let mut g = grid();
        assert_eq!(g.nodes().unwrap(), 41);
        assert_eq!(g.xs()[40], 4.0);
        assert_eq!(g.ts().len(), 11);
        g.dx = 0.3;
        assert!(g.nodes().is_err());
        g.dx = 0.2;
        g.steps = 0;
        assert!(g.nodes().is_err());
    }
}
