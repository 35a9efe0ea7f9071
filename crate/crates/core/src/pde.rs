//! Method-of-lines finite differences for the reaction-diffusion system
//!
//! ```text
//! u_t = D u_xx - a u + k u^2 (a+1-u) - w + y + I
//! w_t = eps (-beta w + c + u)
//! y_t = delta (-u + h - d y)
//! ```
//!
//! Unknowns are interleaved per node as `(u_i, w_i, y_i)`, so the Jacobian
//! has three sub- and super-diagonals (except for periodic walls).

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{PdeMethod, PdeSolution};
use crate::linalg::{BandMatrix, DenseMatrix};
use crate::model::{FhrParams, ModelError};
use crate::ode::{integrate_sampled, IntegrateError, IntegratorConfig, Jacobian, OdeSystem};
use crate::profile::Profile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid spatial grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid initial data: {0}")]
    Profile(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `u_x = 0` at both walls (mirror ghost nodes).
    #[default]
    ZeroFlux,
    /// Wraps with period `2L`; the end nodes are the same point.
    Periodic,
    /// `u = 0` at both walls.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialGrid {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl SpatialGrid {
    pub fn new(half_width: f64, nodes: usize, boundary: Boundary) -> Result<Self, PdeError> {
        let g = SpatialGrid {
            half_width,
            nodes,
            boundary,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        if self.nodes < 3 {
            return Err(PdeError::Grid(format!("need N >= 3 (got {})", self.nodes)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(PdeError::Grid(format!("need finite L > 0 (got {})", self.half_width)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nodes)
            .map(|i| {
                if i + 1 == self.nodes {
                    self.half_width
                } else {
                    -self.half_width + i as f64 * dx
                }
            })
            .collect()
    }

    // neighbours (left, right) of node i and their weights
    fn stencil(&self, i: usize) -> Option<[(usize, f64); 2]> {
        let n = self.nodes;
        let last = n - 1;
        match self.boundary {
            Boundary::ZeroFlux if i == 0 => Some([(1, 2.0), (1, 0.0)]),
            Boundary::ZeroFlux if i == last => Some([(last - 1, 2.0), (last - 1, 0.0)]),
            Boundary::Periodic if i == 0 => Some([(last - 1, 1.0), (1, 1.0)]),
            Boundary::Periodic if i == last => Some([(last - 1, 1.0), (1, 1.0)]),
            Boundary::Dirichlet if i == 0 || i == last => None,
            _ => Some([(i - 1, 1.0), (i + 1, 1.0)]),
        }
    }
}

type Forcing = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The semi-discrete system of dimension `3N`.
#[derive(Clone)]
pub struct PdeSystem {
    params: FhrParams,
    grid: SpatialGrid,
    xs: Vec<f64>,
    forcing: Option<Forcing>,
}

/// Nodes above which the right-hand side is evaluated in parallel.
#[cfg(feature = "parallel")]
const PAR_NODES: usize = 4096;

pub fn semidiscretize(p: &FhrParams, grid: &SpatialGrid) -> Result<PdeSystem, PdeError> {
    p.validate()?;
    grid.validate()?;
    if !(p.diffusion >= 0.0) {
        return Err(PdeError::Grid(format!("need D >= 0 (got {})", p.diffusion)));
    }
    Ok(PdeSystem {
        params: *p,
        grid: *grid,
        xs: grid.xs(),
        forcing: None,
    })
}

impl PdeSystem {
    /// Adds `forcing(x, t)` to the `u` equation.
    pub fn with_forcing(mut self, forcing: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Some(Arc::new(forcing));
        self
    }

    pub fn params(&self) -> &FhrParams {
        &self.params
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    fn node(&self, t: f64, y: &[f64], i: usize, out: &mut [f64]) {
        let p = &self.params;
        let (u, w, yy) = (y[3 * i], y[3 * i + 1], y[3 * i + 2]);
        let k2 = p.diffusion / (self.grid.dx() * self.grid.dx());
        out[0] = match self.grid.stencil(i) {
            None => 0.0,
            Some([(l, wl), (r, wr)]) => {
                let lap = wl * y[3 * l] + wr * y[3 * r] - 2.0 * u;
                let mut v = k2 * lap - p.a * u + p.k * u * u * (p.a + 1.0 - u) - w + yy + p.current;
                if let Some(f) = &self.forcing {
                    v += f(self.xs[i], t);
                }
                v
            }
        };
        out[1] = p.eps * (-p.beta * w + p.c + u);
        out[2] = p.delta * (-u + p.h - p.d * yy);
    }

    /// Initial state from profiles; Dirichlet walls are set to zero.
    pub fn initial_state(&self, init: &InitialData) -> Result<Vec<f64>, PdeError> {
        for (name, prof) in [("u0", &init.u0), ("w0", &init.w0), ("y0", &init.y0)] {
            prof.validate().map_err(|e| PdeError::Profile(format!("{name}: {e}")))?;
        }
        let mut s = Vec::with_capacity(3 * self.xs.len());
        for &x in &self.xs {
            s.extend([init.u0.eval(x), init.w0.eval(x), init.y0.eval(x)]);
        }
        if self.grid.boundary == Boundary::Dirichlet {
            let n = self.xs.len();
            s[0] = 0.0;
            s[3 * (n - 1)] = 0.0;
        }
        Ok(s)
    }
}

impl OdeSystem for PdeSystem {
    fn dim(&self) -> usize {
        3 * self.grid.nodes
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        #[cfg(feature = "parallel")]
        if self.grid.nodes >= PAR_NODES {
            use rayon::prelude::*;
            dydt.par_chunks_mut(3)
                .enumerate()
                .for_each(|(i, out)| self.node(t, y, i, out));
            return;
        }
        for (i, out) in dydt.chunks_mut(3).enumerate() {
            self.node(t, y, i, out);
        }
    }

    fn jacobian(&self, _t: f64, y: &[f64]) -> Option<Jacobian> {
        let p = &self.params;
        let n = self.grid.nodes;
        let k2 = p.diffusion / (self.grid.dx() * self.grid.dx());
        let mut entries = Vec::with_capacity(12 * n);
        for i in 0..n {
            let (r, u) = (3 * i, y[3 * i]);
            if let Some(st) = self.grid.stencil(i) {
                entries.push((r, r, -2.0 * k2 - p.a + p.k * (2.0 * u * (p.a + 1.0) - 3.0 * u * u)));
                for (j, wj) in st {
                    if wj != 0.0 {
                        entries.push((r, 3 * j, wj * k2));
                    }
                }
                entries.push((r, r + 1, -1.0));
                entries.push((r, r + 2, 1.0));
            }
            entries.push((r + 1, r, p.eps));
            entries.push((r + 1, r + 1, -p.eps * p.beta));
            entries.push((r + 2, r, -p.delta));
            entries.push((r + 2, r + 2, -p.delta * p.d));
        }
        if self.grid.boundary == Boundary::Periodic {
            let mut m = DenseMatrix::zeros(3 * n);
            for (i, j, v) in entries {
                m.set(i, j, m.get(i, j) + v);
            }
            Some(Jacobian::Dense(m))
        } else {
            let mut m = BandMatrix::zeros(3 * n, 3, 3);
            for (i, j, v) in entries {
                m.add(i, j, v);
            }
            Some(Jacobian::Banded(m))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialData {
    pub u0: Profile,
    pub w0: Profile,
    pub y0: Profile,
}

/// Integrate `sys` from `ts[0]` and sample the fields at every `ts[j]`.
pub fn solve_pde(
    sys: &PdeSystem,
    init: &InitialData,
    ts: &[f64],
    cfg: &IntegratorConfig,
) -> Result<PdeSolution, PdeError> {
    if ts.len() < 2 || ts.windows(2).any(|w| !(w[1] > w[0])) || !ts.iter().all(|t| t.is_finite()) {
        return Err(PdeError::Grid(
            "need at least two strictly increasing output times".into(),
        ));
    }
    let s0 = sys.initial_state(init)?;
    let (samples, _) = integrate_sampled(sys, ts, &s0, cfg)?;
    let (n, nt) = (sys.grid.nodes, ts.len());
    let mut fields = [vec![0.0; n * nt], vec![0.0; n * nt], vec![0.0; n * nt]];
    for (j, s) in samples.iter().enumerate() {
        for i in 0..n {
            for (c, f) in fields.iter_mut().enumerate() {
                f[i * nt + j] = s[3 * i + c];
            }
        }
    }
    let [u, w, y] = fields;
    Ok(PdeSolution {
        method: PdeMethod::Lines,
        xs: sys.xs.clone(),
        ts: ts.to_vec(),
        u,
        w: Some(w),
        y: Some(y),
        residuals: Vec::new(),
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FhrSystem, ModelForm};
    use crate::ode::integrate;

    fn times(tf: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|j| tf * j as f64 / n as f64).collect()
    }

    #[test]
    fn no_diffusion_decouples_into_ode_copies() {
        // k = 1 so the two cubic conventions coincide
        let p = FhrParams {
            k: 1.0,
            ..FhrParams::reference_set(-0.98, 0.0)
        };
        let grid = SpatialGrid::new(2.0, 5, Boundary::ZeroFlux).unwrap();
        let sys = semidiscretize(&p, &grid).unwrap();
        let init = InitialData {
            u0: Profile::Sampled {
                xs: grid.xs(),
                values: vec![0.3, -0.5, 1.2, 0.0, 0.8],
            },
            w0: Profile::Constant { value: 0.1 },
            y0: Profile::Constant { value: -0.2 },
        };
        let cfg = IntegratorConfig::with_tol(1e-10);
        let ts = times(20.0, 10);
        let sol = solve_pde(&sys, &init, &ts, &cfg).unwrap();
        let ode = FhrSystem::new(p, ModelForm::General);
        for (i, x) in grid.xs().iter().enumerate() {
            let s0 = [init.u0.eval(*x), 0.1, -0.2];
            let traj = integrate(&ode, 0.0, 20.0, &s0, &cfg, &[]).unwrap().trajectory;
            let end = traj.last_state();
            let k = sol.index(i, ts.len() - 1);
            assert!((sol.u[k] - end[0]).abs() < 1e-7, "node {i}");
            assert!((sol.w.as_ref().unwrap()[k] - end[1]).abs() < 1e-7);
            assert!((sol.y.as_ref().unwrap()[k] - end[2]).abs() < 1e-7);
        }
    }

    #[test]
    fn constant_data_stays_constant() {
        let p = FhrParams::reference_set(-0.98, 1.0);
        let grid = SpatialGrid::new(5.0, 41, Boundary::ZeroFlux).unwrap();
        let sys = semidiscretize(&p, &grid).unwrap();
        let init = InitialData {
            u0: Profile::Constant { value: 0.4 },
            w0: Profile::Constant { value: -0.1 },
            y0: Profile::Constant { value: 0.2 },
        };
        let ts = times(10.0, 5);
        let sol = solve_pde(&sys, &init, &ts, &IntegratorConfig::with_tol(1e-9)).unwrap();
        for j in 0..ts.len() {
            let u0 = sol.u_at(0, j);
            for i in 0..grid.nodes {
                assert!((sol.u_at(i, j) - u0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_data_zero_offsets_stay_zero() {
        let p = FhrParams {
            current: 0.0,
            c: 0.0,
            h: 0.0,
            ..FhrParams::reference_set(-0.98, 1.0)
        };
        for bc in [Boundary::ZeroFlux, Boundary::Periodic, Boundary::Dirichlet] {
            let grid = SpatialGrid::new(3.0, 21, bc).unwrap();
            let sys = semidiscretize(&p, &grid).unwrap();
            let sol = solve_pde(
                &sys,
                &InitialData::default(),
                &times(1.0, 4),
                &IntegratorConfig::default(),
            )
            .unwrap();
            assert!(sol.u.iter().all(|v| *v == 0.0));
        }
    }

    fn manufactured_error(nodes: usize) -> f64 {
        let l = 2.0;
        let p = FhrParams {
            eps: 0.0,
            delta: 0.0,
            ..FhrParams::reference_set(-0.5, 0.7)
        };
        let exact = move |x: f64, t: f64| (-t).exp() * (std::f64::consts::PI * x / l).cos();
        let kx = std::f64::consts::PI / l;
        let forcing = move |x: f64, t: f64| {
            let u = exact(x, t);
            // u_t - D u_xx - reaction
            -u + p.diffusion * kx * kx * u + p.a * u - p.k * u * u * (p.a + 1.0 - u) - p.current
        };
        let grid = SpatialGrid::new(l, nodes, Boundary::ZeroFlux).unwrap();
        let sys = semidiscretize(&p, &grid).unwrap().with_forcing(forcing);
        let init = InitialData {
            u0: Profile::Sampled {
                xs: grid.xs(),
                values: grid.xs().iter().map(|&x| exact(x, 0.0)).collect(),
            },
            ..InitialData::default()
        };
        let sol = solve_pde(&sys, &init, &[0.0, 1.0], &IntegratorConfig::with_tol(1e-12).implicit()).unwrap();
        grid.xs()
            .iter()
            .enumerate()
            .map(|(i, &x)| (sol.u_at(i, 1) - exact(x, 1.0)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn manufactured_solution_second_order() {
        let errs: Vec<f64> = [11, 21, 41].iter().map(|&n| manufactured_error(n)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.2, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let p = FhrParams::reference_set(-0.98, 0.8);
        for bc in [Boundary::ZeroFlux, Boundary::Periodic, Boundary::Dirichlet] {
            let grid = SpatialGrid::new(1.0, 6, bc).unwrap();
            let sys = semidiscretize(&p, &grid).unwrap();
            let y: Vec<f64> = (0..18).map(|k| ((k * 7 % 11) as f64 - 5.0) / 7.0).collect();
            let jac = sys.jacobian(0.0, &y).unwrap();
            let mut f0 = vec![0.0; 18];
            let mut f1 = vec![0.0; 18];
            for j in 0..18 {
                let hh = 1e-6;
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[j] += hh;
                ym[j] -= hh;
                sys.rhs(0.0, &yp, &mut f1);
                sys.rhs(0.0, &ym, &mut f0);
                for i in 0..18 {
                    let fd = (f1[i] - f0[i]) / (2.0 * hh);
                    assert!((fd - jac.get(i, j)).abs() < 1e-6 * (1.0 + fd.abs()), "{bc:?} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn periodic_ends_stay_identified() {
        let p = FhrParams::reference_set(-0.98, 1.0);
        let grid = SpatialGrid::new(std::f64::consts::PI, 33, Boundary::Periodic).unwrap();
        let sys = semidiscretize(&p, &grid).unwrap();
        let init = InitialData {
            u0: Profile::Sampled {
                xs: grid.xs(),
                values: grid.xs().iter().map(|x| x.sin() + 0.5 * (2.0 * x).cos()).collect(),
            },
            ..InitialData::default()
        };
        let sol = solve_pde(&sys, &init, &times(2.0, 4), &IntegratorConfig::with_tol(1e-9)).unwrap();
        for j in 0..5 {
            assert!((sol.u_at(0, j) - sol.u_at(32, j)).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(SpatialGrid::new(1.0, 2, Boundary::ZeroFlux).is_err());
        assert!(SpatialGrid::new(0.0, 10, Boundary::ZeroFlux).is_err());
        let p = FhrParams::reference_set(-0.98, -1.0);
        assert!(semidiscretize(&p, &SpatialGrid::new(1.0, 5, Boundary::ZeroFlux).unwrap()).is_err());
    }
}
