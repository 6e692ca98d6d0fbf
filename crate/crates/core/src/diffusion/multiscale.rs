//! Coarse-to-fine driver.

use crate::cloud::TimestepPointCloud;
use crate::geometry::{splat_points, CameraPose, SparseMaps};
use crate::grid::{Grid, Rgb};
use crate::params::{Ablation, SolverParams};
use crate::pyramid::{build_pyramid, build_sparse_pyramid, check_levels, level_dims, upsample};

use super::alternate::{alternate_solve, initial_color, initial_estimates, SubproblemRecord};
use super::problem::{LevelInputs, PreviousFrame, SourceView};
use super::DiffusionError;

/// Smallest side allowed at the coarsest pyramid level.
pub const MIN_COARSE_SIDE: usize = 8;
/// Output depths are clamped to at least this value.
pub const DEPTH_FLOOR: f64 = 1e-6;

/// Full-resolution inputs of one output frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInputs {
    pub camera: CameraPose,
    pub width: usize,
    pub height: usize,
    pub cloud: TimestepPointCloud,
    pub sources: Vec<SourceView>,
    pub previous: Option<PreviousFrame>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub level: usize,
    pub width: usize,
    pub height: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub trace: Vec<SubproblemRecord>,
}

impl LevelReport {
    pub fn iterations(&self) -> usize {
        self.trace.iter().map(|r| r.stats.iterations).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSolution {
    pub depth: Grid<f64>,
    /// Clamped to `[0, 1]`.
    pub color: Grid<Rgb>,
    /// Pixels constrained by a sparse sample or a valid source warp.
    pub coverage: Grid<bool>,
    /// Coarsest level first.
    pub levels: Vec<LevelReport>,
}

impl FrameSolution {
    pub fn finest(&self) -> &LevelReport {
        self.levels.last().expect("at least one level")
    }
}

/// Solves from the coarsest pyramid level to the finest. The cloud is splatted
/// at full resolution and its occupancy-weighted pyramid supplies the sparse
/// data of each level; depth is carried between levels by bilinear upsampling
/// and color restarts from the projected point colors at each level.
pub fn multiscale_solve(
    inputs: &FrameInputs,
    params: &SolverParams,
    ablation: &Ablation,
) -> Result<FrameSolution, DiffusionError> {
    let levels = params.pyramid_levels;
    check_levels(inputs.width, inputs.height, levels, MIN_COARSE_SIDE)?;

    // Splat once at full resolution; coarser levels average the occupied
    // children, which is far less sensitive to depth outliers than re-running
    // the z-buffer on a coarse grid.
    let fine = splat_points(&inputs.cloud, &inputs.camera, inputs.width, inputs.height);
    let depth_pyramid = build_sparse_pyramid(&fine.depth, &fine.occupied, levels)?;
    let color_pyramid = build_sparse_pyramid(&fine.color, &fine.occupied, levels)?;

    let source_pyramids = inputs
        .sources
        .iter()
        .map(|s| build_pyramid(&s.image, levels))
        .collect::<Result<Vec<_>, _>>()?;
    let previous_pyramid = match &inputs.previous {
        Some(p) => Some((
            build_pyramid(&p.color, levels)?,
            build_pyramid(&p.depth, levels)?,
        )),
        None => None,
    };

    let mut estimate: Option<Grid<f64>> = None;
    let mut color: Option<Grid<Rgb>> = None;
    let mut reports = Vec::with_capacity(levels);
    let mut coverage = None;
    for level in (0..levels).rev() {
        let (w, h) = level_dims(inputs.width, inputs.height, level);
        let camera = inputs.camera.at_level(level);
        let sparse = SparseMaps {
            depth: depth_pyramid[level].0.clone(),
            color: color_pyramid[level].0.clone(),
            occupied: depth_pyramid[level].1.clone(),
        };
        debug_assert_eq!(sparse.depth.dims(), (w, h));
        let sources = inputs
            .sources
            .iter()
            .zip(&source_pyramids)
            .map(|(s, pyr)| SourceView {
                image: pyr[level].clone(),
                camera: s.camera.at_level(level),
            })
            .collect();
        let previous =
            inputs
                .previous
                .as_ref()
                .zip(previous_pyramid.as_ref())
                .map(|(p, (pc, pd))| PreviousFrame {
                    color: pc[level].clone(),
                    depth: pd[level].clone(),
                    camera: p.camera.at_level(level),
                });
        let level_inputs = LevelInputs {
            camera,
            sparse,
            sources,
            previous,
        };
        // Only depth is carried between levels. Color restarts from the
        // projected point colors at every level: an upsampled coarse color
        // smears occlusion edges, and because the color gradients set the
        // depth smoothness weights, the smear locks the depth error in place.
        let (depth_init, color_init) = match estimate.take() {
            Some(d) => (
                upsample(&d, w, h),
                initial_color(&level_inputs.sparse, params)?,
            ),
            None => initial_estimates(&level_inputs.sparse, params)?,
        };
        let result = alternate_solve(&level_inputs, params, ablation, &depth_init, &color_init)?;
        log::debug!(
            "level {level} ({w}x{h}): energy {:.6e} -> {:.6e}",
            result.initial_energy,
            result.final_energy
        );
        if level == 0 {
            coverage = Some(result.problem.coverage());
        }
        reports.push(LevelReport {
            level,
            width: w,
            height: h,
            initial_energy: result.initial_energy,
            final_energy: result.final_energy,
            trace: result.trace,
        });
        estimate = Some(result.depth);
        color = Some(result.color);
    }

    let depth = estimate.expect("at least one level");
    let color = color.expect("at least one level");
    Ok(FrameSolution {
        depth: depth.map(|&d| {
            if d.is_finite() {
                d.max(DEPTH_FLOOR)
            } else {
                DEPTH_FLOOR
            }
        }),
        color: color.clamp01(),
        coverage: coverage.expect("finest level solved"),
        levels: reports,
    })
}
