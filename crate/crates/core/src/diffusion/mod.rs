//! Weighted depth and color diffusion.
//!
//! Each output frame minimizes a quadratic depth energy (weighted smoothness,
//! sparse-point attachment, temporal attachment) and a quadratic color energy
//! (smoothness, agreement with the warped input frames and their gradients,
//! temporal attachment). The two are solved alternately with all weights frozen
//! inside each linear solve, from the coarsest pyramid level to the finest.
//!
//! The linear systems are assembled as a matrix-free 5-point stencil in
//! Hessian form, so the residual `Hz − b` is exactly the energy gradient, and
//! solved with Jacobi-preconditioned CG using fixed-order reductions so results
//! are bitwise reproducible at any thread count.

mod alternate;
mod energy;
mod multiscale;
mod pcg;
mod problem;
mod solve;
mod system;
mod weights;

use thiserror::Error;

use crate::pyramid::PyramidError;

pub use alternate::{
    alternate_solve, harmonic_infill, initial_color, initial_estimates, AlternateResult,
    Subproblem, SubproblemRecord,
};
pub use energy::{color_energy, depth_energy, eval_energy};
pub use multiscale::{
    multiscale_solve, FrameInputs, FrameSolution, LevelReport, DEPTH_FLOOR, MIN_COARSE_SIDE,
};
pub use pcg::{pcg, SolveStats};
pub use problem::{FrameProblem, LevelInputs, PreviousFrame, SourceView};
pub use solve::{assemble_color_channel, assemble_depth, solve_color, solve_depth};
pub use system::{dot, StencilSystem};
pub use weights::{
    color_agreement, compute_w_d, compute_w_hat_d, compute_w_p, compute_w_t, compute_weights,
    median_inverse_gradient, WeightMaps, EPS_GRAD, EPS_WEIGHT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffusionError {
    #[error("non-finite or negative values in {0}")]
    NonFiniteInput(&'static str),
    #[error("no sparse samples project into the frame")]
    NoSparseData,
    #[error(transparent)]
    Pyramid(#[from] PyramidError),
}
