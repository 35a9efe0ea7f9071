//! Picard solution against the method-of-lines solution on a refined grid.

use serde::Serialize;
use thiserror::Error;

use crate::field::PdeSolution;
use crate::kernel::{picard_solve, Extension, KernelError, PicardGrid, PicardOptions, SourceContext};
use crate::ode::IntegratorConfig;
use crate::pde::{semidiscretize, solve_pde, Boundary, InitialData, PdeError, SpatialGrid};
use crate::profile::Profile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossCheckError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("refinement factor must be at least 1")]
    Refine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub picard: PdeSolution,
    pub lines: PdeSolution,
    /// Sup-norm gap in `u` over shared nodes.
    pub gap: f64,
    pub gap_w: f64,
    pub gap_y: f64,
}

fn field_gap(a: &PdeSolution, b: &PdeSolution, refine: usize, pick: fn(&PdeSolution) -> Option<&Vec<f64>>) -> f64 {
    let (Some(fa), Some(fb)) = (pick(a), pick(b)) else {
        return f64::NAN;
    };
    let nt = a.ts.len();
    let mut gap: f64 = 0.0;
    for i in 0..a.xs.len() {
        for j in 0..nt {
            gap = gap.max((fa[i * nt + j] - fb[(i * refine) * nt + j]).abs());
        }
    }
    gap
}

/// Solve by Picard on `grid` and by lines with `refine` times finer spacing
/// and matching walls (zero-flux for the constant extension, zero values
/// otherwise), then compare at the Picard nodes.
pub fn crosscheck(
    u0: &Profile,
    ctx: &SourceContext,
    grid: &PicardGrid,
    opts: &PicardOptions,
    refine: usize,
    cfg: &IntegratorConfig,
) -> Result<CrossCheck, CrossCheckError> {
    if refine == 0 {
        return Err(CrossCheckError::Refine);
    }
    let picard = picard_solve(u0, ctx, grid, opts)?;
    let n = picard.xs.len();
    let boundary = match opts.extension {
        Extension::Constant => Boundary::ZeroFlux,
        Extension::Zero => Boundary::Dirichlet,
    };
    let fd_grid = SpatialGrid::new(grid.half_width, refine * (n - 1) + 1, boundary)?;
    let sys = semidiscretize(ctx.params(), &fd_grid)?;
    let init = InitialData {
        u0: u0.clone(),
        w0: ctx.w0.clone(),
        y0: ctx.y0.clone(),
    };
    let lines = solve_pde(&sys, &init, &picard.ts, cfg)?;
    let gap = field_gap(&picard, &lines, refine, |s| Some(&s.u));
    let gap_w = field_gap(&picard, &lines, refine, |s| s.w.as_ref());
    let gap_y = field_gap(&picard, &lines, refine, |s| s.y.as_ref());
    Ok(CrossCheck {
        picard,
        lines,
        gap,
        gap_w,
        gap_y,
    })
}
