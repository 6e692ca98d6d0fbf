//! `cameras.json`: `{"frames": [{"t": 0, "K": [9], "R": [9], "C": [3]}, ...]}`
//! with row-major matrices. `R` maps world to camera, `C` is the center.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::geometry::{CameraPose, ViewTag};

use super::{io_err, DatasetError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub t: usize,
    #[serde(rename = "K")]
    pub k: [f64; 9],
    #[serde(rename = "R")]
    pub r: [f64; 9],
    #[serde(rename = "C")]
    pub c: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    frames: Vec<CameraRecord>,
}

impl CameraRecord {
    pub fn from_pose(pose: &CameraPose) -> Self {
        let row_major = |m: &Matrix3<f64>| {
            let mut out = [0.0; 9];
            for r in 0..3 {
                for c in 0..3 {
                    out[3 * r + c] = m[(r, c)];
                }
            }
            out
        };
        Self {
            t: pose.time_index,
            k: row_major(&pose.intrinsics),
            r: row_major(&pose.rotation),
            c: [pose.center.x, pose.center.y, pose.center.z],
        }
    }

    pub fn to_pose(&self, view: ViewTag) -> Result<CameraPose, crate::geometry::GeometryError> {
        CameraPose::new(
            Matrix3::from_row_slice(&self.k),
            Matrix3::from_row_slice(&self.r),
            Vector3::from_row_slice(&self.c),
            self.t,
            view,
        )
    }
}

/// Parses and validates a camera file. Records must cover `t = 0..n` exactly
/// once (in any order); the result is sorted by `t`.
pub fn parse_cameras(
    text: &str,
    path: &Path,
    view: ViewTag,
) -> Result<Vec<CameraPose>, DatasetError> {
    let file: CameraFile = serde_json::from_str(text).map_err(|e| DatasetError::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut records = file.frames;
    records.sort_by_key(|r| r.t);
    for (i, r) in records.iter().enumerate() {
        if r.t != i {
            return Err(DatasetError::Malformed {
                path: path.to_path_buf(),
                reason: format!(
                    "time indices must be 0..{} without gaps or repeats",
                    records.len()
                ),
            });
        }
    }
    records
        .iter()
        .map(|r| {
            r.to_pose(view).map_err(|source| DatasetError::InvalidPose {
                path: path.to_path_buf(),
                t: r.t,
                source,
            })
        })
        .collect()
}

pub fn load_cameras(path: &Path, view: ViewTag) -> Result<Vec<CameraPose>, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_cameras(&text, path, view)
}

pub fn save_cameras(poses: &[CameraPose], path: &Path) -> Result<(), DatasetError> {
    let file = CameraFile {
        frames: poses.iter().map(CameraRecord::from_pose).collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("camera records serialize");
    fs::write(path, text).map_err(io_err(path))
}
