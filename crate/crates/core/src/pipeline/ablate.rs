use std::path::Path;

use serde::Serialize;

use crate::cloud::TimestepPointCloud;
use crate::io::{CameraPath, FrameSet, RenderedFrame};
use crate::params::{Ablation, SolverParams, Toggle};

use super::metrics::{compute_metrics, mean_of, FrameMetrics};
use super::render::render_sequence;
use super::PipelineError;

/// Sequence-level summary of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    /// `full` or the toggle name.
    pub config: String,
    pub mean_psnr_db: Option<f64>,
    pub mean_depth_rmse: Option<f64>,
    pub mean_temporal_delta: Option<f64>,
    pub mean_coverage: Option<f64>,
    #[serde(skip)]
    pub frames: Vec<FrameMetrics>,
}

impl AblationRow {
    fn new(config: String, frames: Vec<FrameMetrics>) -> Self {
        Self {
            config,
            mean_psnr_db: mean_of(frames.iter().map(|f| f.psnr_db)),
            mean_depth_rmse: mean_of(frames.iter().map(|f| f.depth_rmse)),
            mean_temporal_delta: mean_of(frames.iter().map(|f| f.temporal_delta)),
            mean_coverage: mean_of(frames.iter().map(|f| f.coverage)),
            frames,
        }
    }
}

/// Renders the full method and then each toggle on its own.
pub fn ablate(
    frames: &FrameSet,
    clouds: &[TimestepPointCloud],
    path: &CameraPath,
    params: &SolverParams,
    toggles: &[Toggle],
    ground_truth: Option<&[RenderedFrame]>,
) -> Result<Vec<AblationRow>, PipelineError> {
    let configs = std::iter::once(("full".to_string(), Ablation::default())).chain(
        toggles
            .iter()
            .map(|&t| (t.name().to_string(), Ablation::default().with(t))),
    );
    configs
        .map(|(name, ablation)| {
            log::info!("ablation run `{name}`");
            let outputs = render_sequence(frames, clouds, path, params, &ablation)?;
            let rendered: Vec<RenderedFrame> = outputs.iter().map(|o| o.frame.clone()).collect();
            let coverage: Vec<_> = outputs.iter().map(|o| o.coverage.clone()).collect();
            let metrics = compute_metrics(&rendered, ground_truth, Some(&coverage))?;
            Ok(AblationRow::new(name, metrics))
        })
        .collect()
}

pub fn write_ablation_csv(rows: &[AblationRow], path: &Path) -> Result<(), PipelineError> {
    let err = |e: csv::Error| PipelineError::Csv(path.to_path_buf(), e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush()
        .map_err(|e| PipelineError::Csv(path.to_path_buf(), e.to_string()))
}

/// Parses a comma-separated toggle list; an empty string gives no toggles.
pub fn parse_toggles(list: &str) -> Result<Vec<Toggle>, PipelineError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(PipelineError::Config))
        .collect()
}
