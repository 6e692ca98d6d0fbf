//! Direct evaluation of the discrete energies, term by term.
//!
//! These are sequential pixel loops, kept deliberately independent of the
//! stencil assembly so they can cross-check it.

use crate::grid::{Grid, Rgb};
use crate::params::SolverParams;

use super::problem::FrameProblem;
use super::weights::WeightMaps;

fn neighbours(w: usize, h: usize, x: usize, y: usize) -> impl Iterator<Item = (usize, usize)> {
    let east = (x + 1 < w).then_some((x + 1, y));
    let south = (y + 1 < h).then_some((x, y + 1));
    east.into_iter().chain(south)
}

pub fn depth_energy(
    depth: &Grid<f64>,
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
) -> f64 {
    let (w, h) = depth.dims();
    let mut e = 0.0;
    for y in 0..h {
        for x in 0..w {
            let d = *depth.get(x, y);
            let wd = *weights.w_d.get(x, y);
            for (nx, ny) in neighbours(w, h, x, y) {
                e += wd * (depth.get(nx, ny) - d).powi(2);
            }
            e += params.lambda_pc
                * weights.w_hat_d.get(x, y)
                * (d - problem.sparse.depth.get(x, y)).powi(2);
            if let Some(prev) = &problem.previous {
                e += params.lambda_t * weights.w_t.get(x, y) * (d - prev.depth.get(x, y)).powi(2);
            }
        }
    }
    e
}

pub fn color_energy(
    color: &Grid<Rgb>,
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
) -> f64 {
    let (w, h) = color.dims();
    let mut e = 0.0;
    for y in 0..h {
        for x in 0..w {
            let c = color.get(x, y);
            for (nx, ny) in neighbours(w, h, x, y) {
                let grad = color.get(nx, ny) - c;
                e += grad.norm_squared();
                for (src, wp) in problem.warped.iter().zip(&weights.w_p) {
                    let edge_w = wp.get(x, y).min(*wp.get(nx, ny));
                    let src_grad = src.image.get(nx, ny) - src.image.get(x, y);
                    e += params.lambda_g * edge_w * (grad - src_grad).norm_squared();
                }
            }
            for (src, wp) in problem.warped.iter().zip(&weights.w_p) {
                e += params.lambda_p * wp.get(x, y) * (c - src.image.get(x, y)).norm_squared();
            }
            if let Some(prev) = &problem.previous {
                e += params.lambda_t
                    * weights.w_t.get(x, y)
                    * (c - prev.color.get(x, y)).norm_squared();
            }
        }
    }
    e
}

/// `E = E_D + E_I` at fixed weights.
pub fn eval_energy(
    depth: &Grid<f64>,
    color: &Grid<Rgb>,
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
) -> f64 {
    depth_energy(depth, problem, weights, params) + color_energy(color, problem, weights, params)
}
