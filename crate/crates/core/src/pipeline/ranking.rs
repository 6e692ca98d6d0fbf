use std::f64::consts::PI;

use crate::geometry::CameraPose;

/// Keeps the score finite when the virtual camera sits on an input camera.
pub const CENTER_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ViewRanking {
    /// One score per input view.
    pub scores: Vec<f64>,
    /// The best `min(n, S)` view indices, best first.
    pub selected: Vec<usize>,
}

/// `exp(−θ / 2πσ²) / (‖C − C_s‖² + ε)` where `θ` is the angle between the two
/// orientations.
pub fn rank_score(virtual_cam: &CameraPose, input: &CameraPose, sigma: f64) -> f64 {
    let cos = (((virtual_cam.rotation * input.rotation.transpose()).trace() - 1.0) * 0.5)
        .clamp(-1.0, 1.0);
    let angle = cos.acos();
    let dist2 = (virtual_cam.center - input.center).norm_squared();
    (-angle / (2.0 * PI * sigma * sigma)).exp() / (dist2 + CENTER_EPS)
}

/// Relative score difference below which two views count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Sort key: the log-score snapped to a grid of width [`TIE_TOLERANCE`], so
/// scores that are equal in exact arithmetic but differ by rounding (e.g. two
/// inputs placed symmetrically about the virtual camera, after a rigid
/// transform of the whole rig) compare equal and fall back to the index.
fn tie_key(score: f64) -> f64 {
    if score > 0.0 {
        (score.ln() / TIE_TOLERANCE).round()
    } else {
        f64::NEG_INFINITY
    }
}

/// Scores every input and selects the best `n`. Scores equal to within a
/// relative [`TIE_TOLERANCE`] are ties, and ties go to the lower index.
pub fn rank_views(
    virtual_cam: &CameraPose,
    inputs: &[CameraPose],
    sigma: f64,
    n: usize,
) -> ViewRanking {
    let scores: Vec<f64> = inputs
        .iter()
        .map(|c| rank_score(virtual_cam, c, sigma))
        .collect();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    // stable sort keeps lower indices first among equal keys
    order.sort_by(|&a, &b| tie_key(scores[b]).total_cmp(&tie_key(scores[a])));
    order.truncate(n.min(inputs.len()));
    ViewRanking {
        scores,
        selected: order,
    }
}
