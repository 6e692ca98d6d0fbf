//! Alternating depth/color minimization at a single resolution.

use crate::grid::{Grid, Rgb};
use crate::params::{Ablation, SolverParams};

use super::energy::{color_energy, depth_energy, eval_energy};
use super::pcg::{pcg, SolveStats};
use super::problem::{FrameProblem, LevelInputs};
use super::solve::{solve_color, solve_depth};
use super::system::StencilSystem;
use super::weights::{compute_weights, WeightMaps};
use super::DiffusionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subproblem {
    Depth,
    Color,
}

/// One fixed-weight linear solve and its objective before and after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemRecord {
    pub outer: usize,
    pub kind: Subproblem,
    pub energy_before: f64,
    pub energy_after: f64,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternateResult {
    pub depth: Grid<f64>,
    pub color: Grid<Rgb>,
    /// Data terms warped through the final depth.
    pub problem: FrameProblem,
    /// Weights for the final depth and color.
    pub weights: WeightMaps,
    /// Energy of the initialization, evaluated with the final weights.
    pub initial_energy: f64,
    /// Energy of the result, evaluated with the final weights.
    pub final_energy: f64,
    pub trace: Vec<SubproblemRecord>,
}

impl AlternateResult {
    pub fn total_iterations(&self) -> usize {
        self.trace.iter().map(|r| r.stats.iterations).sum()
    }
}

/// Runs `params.outer_iters` rounds of: weights → depth solve → rewarp →
/// weights → color solve. With zero rounds the initialization is returned.
pub fn alternate_solve(
    inputs: &LevelInputs,
    params: &SolverParams,
    ablation: &Ablation,
    depth_init: &Grid<f64>,
    color_init: &Grid<Rgb>,
) -> Result<AlternateResult, DiffusionError> {
    let mut depth = depth_init.clone();
    let mut color = color_init.clone();
    let mut trace = Vec::with_capacity(2 * params.outer_iters);

    for outer in 0..params.outer_iters {
        let problem = FrameProblem::warp(inputs, &depth);
        let weights = compute_weights(&problem, &color, params, ablation);
        let before = depth_energy(&depth, &problem, &weights, params);
        let (new_depth, stats) = solve_depth(&problem, &weights, params, &depth)?;
        let after = depth_energy(&new_depth, &problem, &weights, params);
        trace.push(SubproblemRecord {
            outer,
            kind: Subproblem::Depth,
            energy_before: before,
            energy_after: after,
            stats,
        });
        depth = new_depth;

        let problem = FrameProblem::warp(inputs, &depth);
        let weights = compute_weights(&problem, &color, params, ablation);
        let before = color_energy(&color, &problem, &weights, params);
        let (new_color, stats) = solve_color(&problem, &weights, params, &color)?;
        let after = color_energy(&new_color, &problem, &weights, params);
        trace.push(SubproblemRecord {
            outer,
            kind: Subproblem::Color,
            energy_before: before,
            energy_after: after,
            stats,
        });
        color = new_color;
    }

    let problem = FrameProblem::warp(inputs, &depth);
    let weights = compute_weights(&problem, &color, params, ablation);
    let initial_energy = eval_energy(depth_init, color_init, &problem, &weights, params);
    let final_energy = eval_energy(&depth, &color, &problem, &weights, params);
    Ok(AlternateResult {
        depth,
        color,
        problem,
        weights,
        initial_energy,
        final_energy,
        trace,
    })
}

/// Fills a sparse scalar map by minimizing `Σ |∇z|² + Σ_occupied (z − v)²`.
pub fn harmonic_infill(
    values: &Grid<f64>,
    occupied: &Grid<bool>,
    params: &SolverParams,
) -> Result<(Grid<f64>, SolveStats), DiffusionError> {
    let (w, h) = values.dims();
    let mut sys = StencilSystem::new(w, h);
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..w * h {
        sys.add_east(i, 1.0, 0.0);
        sys.add_south(i, 1.0, 0.0);
        if occupied.as_slice()[i] {
            let v = values.as_slice()[i];
            if !v.is_finite() {
                return Err(DiffusionError::NonFiniteInput("sparse samples"));
            }
            sys.add_data(i, 1.0, v);
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(DiffusionError::NoSparseData);
    }
    // Start from the sample mean so constant data is reproduced exactly.
    let start = vec![sum / count as f64; w * h];
    let (x, stats) = pcg(&sys, &start, params.cg_tolerance, params.inner_iters);
    Ok((Grid::from_vec(w, h, x), stats))
}

/// Harmonic infill of the sparse depth and of each sparse color channel.
pub fn initial_estimates(
    sparse: &crate::geometry::SparseMaps,
    params: &SolverParams,
) -> Result<(Grid<f64>, Grid<Rgb>), DiffusionError> {
    let (depth, _) = harmonic_infill(&sparse.depth, &sparse.occupied, params)?;
    Ok((depth, initial_color(sparse, params)?))
}

/// Harmonic infill of the projected point colors, channel by channel.
pub fn initial_color(
    sparse: &crate::geometry::SparseMaps,
    params: &SolverParams,
) -> Result<Grid<Rgb>, DiffusionError> {
    let channels = sparse.color.channels();
    let mut filled = Vec::with_capacity(3);
    for c in &channels {
        filled.push(harmonic_infill(c, &sparse.occupied, params)?.0);
    }
    let filled: [Grid<f64>; 3] = filled.try_into().expect("three channels");
    Ok(Grid::from_channels(&filled))
}
