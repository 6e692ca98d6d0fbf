//! Pinhole cameras and the reprojection machinery the energies consume:
//! projection, splatting, backward warping and z-buffer visibility.
//!
//! Pixel coordinates are continuous with the origin at the center of the
//! top-left pixel; splatting rounds to the nearest pixel.

mod camera;
pub mod rotation;
mod splat;
mod visibility;
mod warp;

use thiserror::Error;

pub use camera::{intrinsics, CameraPose, DepthSample, Pixel, Projection, ViewTag};
pub use rotation::{angle_axis_to_rotation, rotation_angle_between, rotation_to_angle_axis};
pub use splat::{splat_points, SparseMaps};
pub use visibility::{visibility_from_hits, visibility_maps, Z_TOLERANCE_FRACTION};
pub use warp::{
    reproject_previous, source_hits, warp_frame, warp_with_hits, Reprojection, SourceHit,
    WarpedImage,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("pose contains non-finite values")]
    NonFinitePose,
    #[error("invalid intrinsics: {0}")]
    BadIntrinsics(&'static str),
    #[error("rotation is not orthonormal with det +1 (|RᵀR - I| = {err:e}, det = {det})")]
    NotARotation { err: f64, det: f64 },
}
