//! End-to-end orchestration: view ranking, the streaming render loop,
//! synthetic scenes with ground truth, metrics, ablations and baselines.

mod ablate;
mod baselines;
mod metrics;
mod ranking;
mod render;
mod synthetic;

use std::path::PathBuf;

use thiserror::Error;

use crate::diffusion::DiffusionError;
use crate::io::DatasetError;

pub use ablate::{ablate, parse_toggles, write_ablation_csv, AblationRow};
pub use baselines::{
    best_single_view_psnr, nearest_fill, nearest_sample_depth, single_view_estimate,
};
pub use metrics::{
    compute_metrics, coverage_fraction, depth_rmse, mean_of, psnr, read_metrics_csv,
    temporal_delta, write_metrics_csv, FrameMetrics, PSNR_CAP_DB,
};
pub use ranking::{rank_score, rank_views, ViewRanking, CENTER_EPS, TIE_TOLERANCE};
pub use render::{frame_inputs, render_sequence, with_threads, write_outputs, FrameOutput};
pub use synthetic::{
    generate_synthetic, SampledPoint, SurfaceHit, SyntheticDataset, SyntheticScene, SyntheticSpec,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        source: DiffusionError,
    },
    #[error("camera path has {path} poses but only {frames} input frames")]
    PathTooLong { path: usize, frames: usize },
    #[error("expected {expected} {what}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Config(String),
    #[error("{0}: CSV error: {1}")]
    Csv(PathBuf, String),
}
