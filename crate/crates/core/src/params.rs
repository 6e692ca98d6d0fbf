use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Solver configuration, serialized as `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Sparse point cloud attachment weight (typical range 0.25–2).
    pub lambda_pc: f64,
    /// Temporal consistency weight (typical range 0.01–0.1).
    pub lambda_t: f64,
    /// Color data weight (typical range 5–20).
    pub lambda_p: f64,
    /// Color gradient weight (typical range 5–20).
    pub lambda_g: f64,
    /// Soft occlusion tolerance of the color agreement weights.
    pub sigma: f64,
    /// Number of ranked input views used per frame.
    pub views: usize,
    pub pyramid_levels: usize,
    /// Depth/color alternations per pyramid level.
    pub outer_iters: usize,
    /// Conjugate gradient iteration cap per linear solve.
    pub inner_iters: usize,
    /// Relative residual target of each linear solve.
    pub cg_tolerance: f64,
    /// Keyframe anchor spacing for trajectory smoothing.
    pub kappa: usize,
    pub smoothing_window_sigma: f64,
    pub smoothing_data_weight: f64,
    /// Angular bandwidth of the view ranking score.
    pub rank_sigma: f64,
    /// Divide the inverse color-gradient factor of the depth smoothness weight
    /// by its per-frame median, so smoothness is measured relative to the
    /// frame's typical texture instead of in absolute color units.
    pub normalize_depth_weights: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            lambda_pc: 1.0,
            lambda_t: 0.05,
            lambda_p: 10.0,
            lambda_g: 10.0,
            sigma: 0.075,
            views: 4,
            pyramid_levels: 7,
            outer_iters: 3,
            inner_iters: 500,
            cg_tolerance: 1e-6,
            kappa: 20,
            smoothing_window_sigma: 1.5,
            smoothing_data_weight: 1.0,
            rank_sigma: 0.075,
            normalize_depth_weights: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid solver parameter `{field}`: {reason}")]
pub struct ParamsError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let lambdas = [
            ("lambda_pc", self.lambda_pc),
            ("lambda_t", self.lambda_t),
            ("lambda_p", self.lambda_p),
            ("lambda_g", self.lambda_g),
            ("smoothing_data_weight", self.smoothing_data_weight),
        ];
        for (field, v) in lambdas {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ParamsError {
                    field,
                    reason: "must be finite and >= 0",
                });
            }
        }
        let positives = [
            ("sigma", self.sigma),
            ("rank_sigma", self.rank_sigma),
            ("cg_tolerance", self.cg_tolerance),
            ("smoothing_window_sigma", self.smoothing_window_sigma),
        ];
        for (field, v) in positives {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ParamsError {
                    field,
                    reason: "must be finite and > 0",
                });
            }
        }
        if self.views == 0 {
            return Err(ParamsError {
                field: "views",
                reason: "must be >= 1",
            });
        }
        if self.pyramid_levels == 0 {
            return Err(ParamsError {
                field: "pyramid_levels",
                reason: "must be >= 1",
            });
        }
        if self.kappa == 0 {
            return Err(ParamsError {
                field: "kappa",
                reason: "must be >= 1",
            });
        }
        Ok(())
    }
}

/// Terms switched off for ablation runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ablation {
    /// `λ_T = 0`.
    pub no_temporal: bool,
    /// Sparse-depth confidence replaced by plain occupancy.
    pub no_pc_weights: bool,
    /// Depth smoothness weight fixed to 1.
    pub no_depth_weights: bool,
    /// Drop the inverse color-gradient factor of the depth smoothness weight.
    pub no_image_grads: bool,
    /// Projection weights replaced by the visibility indicator.
    pub no_proj_weights: bool,
}

/// One named ablation switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Toggle {
    NoTemporal,
    NoPcWeights,
    NoDepthWeights,
    NoImageGrads,
    NoProjWeights,
}

impl Toggle {
    pub const ALL: [Toggle; 5] = [
        Toggle::NoTemporal,
        Toggle::NoPcWeights,
        Toggle::NoDepthWeights,
        Toggle::NoImageGrads,
        Toggle::NoProjWeights,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Toggle::NoTemporal => "no_temporal",
            Toggle::NoPcWeights => "no_pc_weights",
            Toggle::NoDepthWeights => "no_depth_weights",
            Toggle::NoImageGrads => "no_image_grads",
            Toggle::NoProjWeights => "no_proj_weights",
        }
    }
}

impl fmt::Display for Toggle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Toggle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Toggle::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| format!("unknown ablation toggle `{s}`"))
    }
}

impl Ablation {
    pub fn with(mut self, toggle: Toggle) -> Self {
        match toggle {
            Toggle::NoTemporal => self.no_temporal = true,
            Toggle::NoPcWeights => self.no_pc_weights = true,
            Toggle::NoDepthWeights => self.no_depth_weights = true,
            Toggle::NoImageGrads => self.no_image_grads = true,
            Toggle::NoProjWeights => self.no_proj_weights = true,
        }
        self
    }

    pub fn from_toggles(toggles: &[Toggle]) -> Self {
        toggles.iter().fold(Self::default(), |a, &t| a.with(t))
    }

    pub fn is_full_method(&self) -> bool {
        *self == Self::default()
    }
}
