//! On-disk formats and the dataset directory layout.
//!
//! ```text
//! root/views/view_%02d/frame_%05d.png   input frames
//! root/views/view_%02d/cameras.json     per-view poses
//! root/clouds/cloud_%05d.ply            sparse points per timestep
//! root/path/cameras.json                virtual camera path
//! root/config.json                      solver parameters
//! ```
//!
//! Colors are linear floats in [0, 1] in memory and 8-bit at the file
//! boundary. Depth is stored losslessly as 32-bit little-endian PFM.

mod cameras;
mod dataset;
mod image;
mod pfm;
mod ply;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geometry::GeometryError;

pub use cameras::{load_cameras, parse_cameras, save_cameras, CameraRecord};
pub use dataset::{
    cloud_path, frame_path, load_camera_path, load_dataset, load_frames, load_params,
    save_camera_path, save_dataset, save_frame, save_params, view_dir, CameraPath, FrameSet,
    RenderedFrame, ViewStream,
};
pub use image::{load_image, load_mask, save_image, save_mask};
pub use pfm::{load_depth, read_pfm, save_depth, write_pfm};
pub use ply::{load_cloud, read_ply, save_cloud, write_ply};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("{path}: bad header: {reason}")]
    BadHeader { path: PathBuf, reason: String },
    #[error("{path}: malformed content: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("{path}: resolution {found:?} does not match {expected:?}")]
    ResolutionMismatch {
        path: PathBuf,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("view {view}: {frames} frames but {poses} poses")]
    PoseCountMismatch {
        view: usize,
        frames: usize,
        poses: usize,
    },
    #[error("{path}: invalid pose for t={t}: {source}")]
    InvalidPose {
        path: PathBuf,
        t: usize,
        source: GeometryError,
    },
    #[error("dataset needs at least {min} {what}, found {found}")]
    TooFew {
        what: &'static str,
        min: usize,
        found: usize,
    },
    #[error("{path}: refusing to write non-finite value at index {index}")]
    NonFinite { path: PathBuf, index: usize },
    #[error("{path}: I/O failure: {source}")]
    IoFailure {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DatasetError::MissingFile(path.to_path_buf())
        } else {
            DatasetError::IoFailure {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}
