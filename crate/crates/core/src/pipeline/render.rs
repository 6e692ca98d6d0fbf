//! The streaming per-frame render loop.

use std::path::Path;

use crate::cloud::TimestepPointCloud;
use crate::diffusion::{multiscale_solve, FrameInputs, FrameSolution, PreviousFrame, SourceView};
use crate::grid::Grid;
use crate::io::{save_frame, save_mask, CameraPath, FrameSet, RenderedFrame};
use crate::params::{Ablation, SolverParams};

use super::metrics::{compute_metrics, write_metrics_csv, FrameMetrics};
use super::ranking::{rank_views, ViewRanking};
use super::PipelineError;

/// Per-frame output of [`render_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput {
    pub frame: RenderedFrame,
    pub coverage: Grid<bool>,
    pub ranking: ViewRanking,
    pub solution_levels: Vec<crate::diffusion::LevelReport>,
}

/// Inputs of one output frame: the virtual pose, its cloud and the ranked sources.
pub fn frame_inputs(
    frames: &FrameSet,
    clouds: &[TimestepPointCloud],
    path: &CameraPath,
    t: usize,
    params: &SolverParams,
    previous: Option<PreviousFrame>,
) -> (FrameInputs, ViewRanking) {
    let camera = path.poses[t].clone();
    let ranking = rank_views(
        &camera,
        &frames.poses_at(t),
        params.rank_sigma,
        params.views,
    );
    let sources = ranking
        .selected
        .iter()
        .map(|&s| SourceView {
            image: frames.views[s].frames[t].clone(),
            camera: frames.views[s].poses[t].clone(),
        })
        .collect();
    (
        FrameInputs {
            camera,
            width: frames.width,
            height: frames.height,
            cloud: clouds[t].clone(),
            sources,
            previous,
        },
        ranking,
    )
}

/// Renders every pose of `path` in order, feeding each result forward as the
/// previous frame of the next. Runs on the calling thread's rayon pool.
pub fn render_sequence(
    frames: &FrameSet,
    clouds: &[TimestepPointCloud],
    path: &CameraPath,
    params: &SolverParams,
    ablation: &Ablation,
) -> Result<Vec<FrameOutput>, PipelineError> {
    params
        .validate()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    if path.len() > frames.num_frames() || path.len() > clouds.len() {
        return Err(PipelineError::PathTooLong {
            path: path.len(),
            frames: frames.num_frames().min(clouds.len()),
        });
    }
    let mut outputs: Vec<FrameOutput> = Vec::with_capacity(path.len());
    for t in 0..path.len() {
        let previous = outputs.last().map(|o| PreviousFrame {
            color: o.frame.color.clone(),
            depth: o.frame.depth.clone(),
            camera: path.poses[t - 1].clone(),
        });
        let (inputs, ranking) = frame_inputs(frames, clouds, path, t, params, previous);
        let FrameSolution {
            depth,
            color,
            coverage,
            levels,
        } = multiscale_solve(&inputs, params, ablation)
            .map_err(|source| PipelineError::Frame { frame: t, source })?;
        log::info!(
            "frame {t}: views {:?}, {} fine-level CG iterations",
            ranking.selected,
            levels.last().map_or(0, |l| l.iterations())
        );
        outputs.push(FrameOutput {
            frame: RenderedFrame {
                color,
                depth,
                time_index: t,
            },
            coverage,
            ranking,
            solution_levels: levels,
        });
    }
    Ok(outputs)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(
    threads: usize,
    f: impl FnOnce() -> R + Send,
) -> Result<R, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Writes `frame_*.png`, `depth_*.pfm`, `coverage_*.png` and `metrics.csv`.
pub fn write_outputs(
    outputs: &[FrameOutput],
    ground_truth: Option<&[RenderedFrame]>,
    dir: &Path,
) -> Result<Vec<FrameMetrics>, PipelineError> {
    for o in outputs {
        save_frame(&o.frame, dir)?;
        save_mask(
            &o.coverage,
            &dir.join(format!("coverage_{:05}.png", o.frame.time_index)),
        )?;
    }
    let frames: Vec<RenderedFrame> = outputs.iter().map(|o| o.frame.clone()).collect();
    let coverage: Vec<Grid<bool>> = outputs.iter().map(|o| o.coverage.clone()).collect();
    let rows = compute_metrics(&frames, ground_truth, Some(&coverage))?;
    write_metrics_csv(&rows, &dir.join("metrics.csv"))?;
    Ok(rows)
}
