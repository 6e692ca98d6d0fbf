use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, Rgb};
use crate::io::RenderedFrame;

use super::PipelineError;

/// Reported when two images are identical.
pub const PSNR_CAP_DB: f64 = 99.0;

/// `10·log10(1 / MSE)` over all channels of `[0, 1]` colors, capped at 99 dB.
pub fn psnr(a: &Grid<Rgb>, b: &Grid<Rgb>) -> f64 {
    assert!(a.same_dims(b), "psnr of differently sized images");
    let n = (a.len() * 3) as f64;
    let sse: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(p, q)| (p - q).norm_squared())
        .sum();
    let mse = sse / n;
    if mse <= 0.0 {
        return PSNR_CAP_DB;
    }
    (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
}

/// RMSE over pixels where the ground truth depth is positive and finite.
pub fn depth_rmse(estimate: &Grid<f64>, ground_truth: &Grid<f64>) -> Option<f64> {
    assert!(
        estimate.same_dims(ground_truth),
        "depth_rmse of differently sized maps"
    );
    let (sum, n) = estimate
        .as_slice()
        .iter()
        .zip(ground_truth.as_slice())
        .filter(|(_, g)| **g > 0.0 && g.is_finite())
        .fold((0.0, 0usize), |(s, n), (e, g)| (s + (e - g).powi(2), n + 1));
    (n > 0).then(|| (sum / n as f64).sqrt())
}

/// Mean absolute per-channel difference between consecutive frames.
pub fn temporal_delta(current: &Grid<Rgb>, previous: &Grid<Rgb>) -> f64 {
    assert!(
        current.same_dims(previous),
        "temporal_delta of differently sized images"
    );
    let sum: f64 = current
        .as_slice()
        .iter()
        .zip(previous.as_slice())
        .map(|(a, b)| (a - b).abs().sum())
        .sum();
    sum / (current.len() * 3) as f64
}

pub fn coverage_fraction(mask: &Grid<bool>) -> f64 {
    mask.as_slice().iter().filter(|&&m| m).count() as f64 / mask.len().max(1) as f64
}

/// One row of `metrics.csv`. Missing values are written as empty fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub frame_index: usize,
    pub psnr_db: Option<f64>,
    pub depth_rmse: Option<f64>,
    pub temporal_delta: Option<f64>,
    pub coverage: Option<f64>,
}

/// Metrics of a rendered sequence against optional ground truth. `coverage`
/// holds one mask per rendered frame when available.
pub fn compute_metrics(
    rendered: &[RenderedFrame],
    ground_truth: Option<&[RenderedFrame]>,
    coverage: Option<&[Grid<bool>]>,
) -> Result<Vec<FrameMetrics>, PipelineError> {
    if let Some(gt) = ground_truth {
        if gt.len() < rendered.len() {
            return Err(PipelineError::LengthMismatch {
                what: "ground truth frames",
                expected: rendered.len(),
                found: gt.len(),
            });
        }
    }
    if let Some(cov) = coverage {
        if cov.len() != rendered.len() {
            return Err(PipelineError::LengthMismatch {
                what: "coverage masks",
                expected: rendered.len(),
                found: cov.len(),
            });
        }
    }
    let mut rows = Vec::with_capacity(rendered.len());
    for (i, frame) in rendered.iter().enumerate() {
        let gt = ground_truth.map(|g| &g[i]);
        if let Some(g) = gt {
            if !g.color.same_dims(&frame.color) {
                return Err(PipelineError::LengthMismatch {
                    what: "ground truth pixels",
                    expected: frame.color.len(),
                    found: g.color.len(),
                });
            }
        }
        rows.push(FrameMetrics {
            frame_index: frame.time_index,
            psnr_db: gt.map(|g| psnr(&frame.color, &g.color)),
            depth_rmse: gt.and_then(|g| depth_rmse(&frame.depth, &g.depth)),
            temporal_delta: (i > 0).then(|| temporal_delta(&frame.color, &rendered[i - 1].color)),
            coverage: coverage.map(|c| coverage_fraction(&c[i])),
        });
    }
    Ok(rows)
}

pub fn write_metrics_csv(rows: &[FrameMetrics], path: &Path) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| PipelineError::Csv(path.to_path_buf(), e.to_string()))?;
    for r in rows {
        w.serialize(r)
            .map_err(|e| PipelineError::Csv(path.to_path_buf(), e.to_string()))?;
    }
    w.flush()
        .map_err(|e| PipelineError::Csv(path.to_path_buf(), e.to_string()))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<FrameMetrics>, PipelineError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| PipelineError::Csv(path.to_path_buf(), e.to_string()))?;
    r.deserialize()
        .collect::<Result<Vec<FrameMetrics>, _>>()
        .map_err(|e| PipelineError::Csv(path.to_path_buf(), e.to_string()))
}

/// Mean of the present values.
pub fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}
