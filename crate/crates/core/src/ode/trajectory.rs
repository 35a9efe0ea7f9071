use serde::Serialize;

use super::{IntegratorConfig, Method};

/// Per-step continuous extension.
#[derive(Debug, Clone)]
pub enum Interpolant {
    /// Dormand-Prince coefficients `r1..r5`, each of length `dim`.
    Dopri5(Vec<f64>),
    /// `y(t0 + s h) = y0 + s (y1 - y0 + (1-s)(d2 + s d3))`.
    Rodas {
        y0: Vec<f64>,
        y1: Vec<f64>,
        d2: Vec<f64>,
        d3: Vec<f64>,
    },
}

/// One accepted step, `[t_start, t_end]`. `h` is the step the interpolant
/// was built for; `t_end < t_start + h` after a terminal event.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub h: f64,
    pub interp: Interpolant,
}

impl Segment {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let s = (t - self.t_start) / self.h;
        match &self.interp {
            Interpolant::Dopri5(r) => {
                let n = out.len();
                let s1 = 1.0 - s;
                for i in 0..n {
                    out[i] = r[i] + s * (r[n + i] + s1 * (r[2 * n + i] + s * (r[3 * n + i] + s1 * r[4 * n + i])));
                }
            }
            Interpolant::Rodas { y0, y1, d2, d3 } => {
                let s1 = 1.0 - s;
                for i in 0..out.len() {
                    out[i] = y0[i] + s * (y1[i] - y0[i] + s1 * (d2[i] + s * d3[i]));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Stats {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobian_evals: usize,
    pub factorizations: usize,
}

/// Accepted-step samples plus dense output between them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    segments: Vec<Segment>,
    pub stats: Stats,
}

impl Trajectory {
    pub(crate) fn new(dim: usize, t0: f64, y0: &[f64], cfg: &IntegratorConfig) -> Self {
        Trajectory {
            dim,
            times: vec![t0],
            states: y0.to_vec(),
            segments: Vec::new(),
            stats: Stats {
                method: cfg.method,
                abs_tol: cfg.abs_tol,
                rel_tol: cfg.rel_tol,
                ..Default::default()
            },
        }
    }

    pub(crate) fn push(&mut self, seg: &Segment, y1: &[f64]) {
        self.times.push(seg.t_end);
        self.states.extend_from_slice(y1);
        self.segments.push(seg.clone());
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.states.chunks_exact(self.dim))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Dense output; stored samples are returned verbatim at knots.
    /// Returns `None` outside `[t_start, t_end]`.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return None;
        }
        let idx = self.times.partition_point(|&x| x < t);
        if idx < self.times.len() && self.times[idx] == t {
            return Some(self.state(idx).to_vec());
        }
        let seg = &self.segments[idx - 1];
        let mut out = vec![0.0; self.dim];
        seg.eval(t, &mut out);
        Some(out)
    }

    /// Samples the stored knots plus `per_step - 1` interior points of every
    /// step.
    pub fn dense_samples(&self, per_step: usize) -> Vec<(f64, Vec<f64>)> {
        let per_step = per_step.max(1);
        let mut out = Vec::with_capacity(self.len() * per_step);
        out.push((self.times[0], self.state(0).to_vec()));
        for (i, seg) in self.segments.iter().enumerate() {
            for j in 1..per_step {
                let t = seg.t_start + (seg.t_end - seg.t_start) * j as f64 / per_step as f64;
                let mut y = vec![0.0; self.dim];
                seg.eval(t, &mut y);
                out.push((t, y));
            }
            out.push((self.times[i + 1], self.state(i + 1).to_vec()));
        }
        out
    }

    /// Values on a uniform grid of `n >= 2` points spanning the trajectory.
    pub fn resample(&self, n: usize) -> Vec<(f64, Vec<f64>)> {
        let (a, b) = (self.t_start(), self.t_end());
        (0..n)
            .map(|i| {
                let t = if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                };
                (t, self.eval(t).expect("inside span"))
            })
            .collect()
    }
}
