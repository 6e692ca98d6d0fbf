//! Assembly and solution of the fixed-weight depth and color subproblems.

use rayon::prelude::*;

use crate::grid::{Grid, Rgb};
use crate::params::SolverParams;

use super::pcg::{pcg, SolveStats};
use super::problem::FrameProblem;
use super::system::StencilSystem;
use super::weights::WeightMaps;
use super::DiffusionError;

fn check_finite(
    what: &'static str,
    values: impl IntoIterator<Item = f64>,
) -> Result<(), DiffusionError> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(DiffusionError::NonFiniteInput(what))
    }
}

fn checked(sys: StencilSystem, what: &'static str) -> Result<StencilSystem, DiffusionError> {
    if sys.is_diagonally_dominant() && sys.rhs().iter().all(|v| v.is_finite()) {
        Ok(sys)
    } else {
        Err(DiffusionError::NonFiniteInput(what))
    }
}

/// Depth system: `Σ w_D(x)·(|D(x+1)−D(x)|² + |D(x+W)−D(x)|²) + λ_PC Σ w_D̂ (D − D̂)²
/// + λ_T Σ w_T (D − D_prev)²`.
pub fn assemble_depth(
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
) -> Result<StencilSystem, DiffusionError> {
    let (w, h) = problem.dims();
    let mut sys = StencilSystem::new(w, h);
    let wd = weights.w_d.as_slice();
    let whd = weights.w_hat_d.as_slice();
    let dhat = problem.sparse.depth.as_slice();
    let wt = weights.w_t.as_slice();
    for i in 0..w * h {
        sys.add_east(i, wd[i], 0.0);
        sys.add_south(i, wd[i], 0.0);
        if whd[i] > 0.0 {
            sys.add_data(i, params.lambda_pc * whd[i], dhat[i]);
        }
    }
    if let Some(prev) = &problem.previous {
        let dprev = prev.depth.as_slice();
        for i in 0..w * h {
            if wt[i] > 0.0 {
                sys.add_data(i, params.lambda_t * wt[i], dprev[i]);
            }
        }
    }
    checked(sys, "depth weights")
}

/// Color system for one channel: unit smoothness on every edge, projection
/// data terms, projected-gradient terms on edges weighted by the smaller of the
/// two endpoint projection weights, and the temporal term.
pub fn assemble_color_channel(
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
    channel: usize,
) -> Result<StencilSystem, DiffusionError> {
    let (w, h) = problem.dims();
    let mut sys = StencilSystem::new(w, h);
    for i in 0..w * h {
        sys.add_east(i, 1.0, 0.0);
        sys.add_south(i, 1.0, 0.0);
    }
    for (src, wp) in problem.warped.iter().zip(&weights.w_p) {
        let img = src.image.as_slice();
        let wp = wp.as_slice();
        for i in 0..w * h {
            if wp[i] > 0.0 {
                sys.add_data(i, params.lambda_p * wp[i], img[i][channel]);
            }
            if params.lambda_g > 0.0 {
                if (i + 1) % w != 0 {
                    let we = wp[i].min(wp[i + 1]);
                    if we > 0.0 {
                        sys.add_east(
                            i,
                            params.lambda_g * we,
                            img[i + 1][channel] - img[i][channel],
                        );
                    }
                }
                if i + w < w * h {
                    let ws = wp[i].min(wp[i + w]);
                    if ws > 0.0 {
                        sys.add_south(
                            i,
                            params.lambda_g * ws,
                            img[i + w][channel] - img[i][channel],
                        );
                    }
                }
            }
        }
    }
    if let Some(prev) = &problem.previous {
        let prev_color = prev.color.as_slice();
        let wt = weights.w_t.as_slice();
        for i in 0..w * h {
            if wt[i] > 0.0 {
                sys.add_data(i, params.lambda_t * wt[i], prev_color[i][channel]);
            }
        }
    }
    checked(sys, "color weights")
}

pub fn solve_depth(
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
    init: &Grid<f64>,
) -> Result<(Grid<f64>, SolveStats), DiffusionError> {
    check_finite("initial depth", init.as_slice().iter().copied())?;
    let sys = assemble_depth(problem, weights, params)?;
    let (x, stats) = pcg(
        &sys,
        init.as_slice(),
        params.cg_tolerance,
        params.inner_iters,
    );
    if !stats.converged {
        log::warn!(
            "depth solve stopped at relative residual {:.2e} after {} iterations",
            stats.rel_residual,
            stats.iterations
        );
    }
    Ok((Grid::from_vec(init.width(), init.height(), x), stats))
}

/// Solves the three channels independently. The returned stats are those of
/// the worst channel.
pub fn solve_color(
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
    init: &Grid<Rgb>,
) -> Result<(Grid<Rgb>, SolveStats), DiffusionError> {
    check_finite(
        "initial color",
        init.as_slice().iter().flat_map(|c| c.iter().copied()),
    )?;
    let init_channels = init.channels();
    let results: Vec<(Vec<f64>, SolveStats)> = (0..3)
        .into_par_iter()
        .map(|c| {
            let sys = assemble_color_channel(problem, weights, params, c)?;
            Ok(pcg(
                &sys,
                init_channels[c].as_slice(),
                params.cg_tolerance,
                params.inner_iters,
            ))
        })
        .collect::<Result<_, DiffusionError>>()?;
    let (w, h) = init.dims();
    let mut stats = results[0].1;
    for (_, s) in &results[1..] {
        if s.rel_residual > stats.rel_residual {
            stats.rel_residual = s.rel_residual;
        }
        stats.iterations = stats.iterations.max(s.iterations);
        stats.converged &= s.converged;
    }
    if !stats.converged {
        log::warn!(
            "color solve stopped at relative residual {:.2e} after {} iterations",
            stats.rel_residual,
            stats.iterations
        );
    }
    let channels = [0, 1, 2].map(|c| Grid::from_vec(w, h, results[c].0.clone()));
    Ok((Grid::from_channels(&channels), stats))
}
