//! Temporally consistent novel-view synthesis for dynamic scenes.
//!
//! Given per-timestep camera poses and sparse, temporally inconsistent colored
//! point clouds, each virtual frame's depth and color are recovered by
//! alternately minimizing two weighted quadratic diffusion energies. Per-pixel
//! confidence weights come from reprojecting the input views and the previous
//! output frame, and the solve runs coarse-to-fine.
//!
//! Modules:
//! - [`geometry`]: pinhole cameras, splatting, warping, visibility
//! - [`io`]: dataset layout, PLY/PFM/PNG/JSON formats
//! - [`pyramid`]: image pyramids
//! - [`pose_smoothing`]: windowed trajectory smoothing
//! - [`diffusion`]: weight maps, linear systems, alternating multiscale solve
//! - [`pipeline`]: view ranking, streaming render loop, synthetic scenes,
//!   metrics and ablations

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

pub mod cloud;
pub mod diffusion;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod params;
pub mod pipeline;
pub mod pose_smoothing;
pub mod pyramid;

pub use cloud::{ColoredPoint, TimestepPointCloud};
pub use geometry::{CameraPose, Pixel};
pub use grid::{Grid, Rgb};
pub use params::{Ablation, SolverParams, Toggle};
