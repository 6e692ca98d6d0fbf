//! Trajectory refinement: pulls a noisy per-frame camera path toward a smooth
//! one with Gaussian-windowed penalties on center and angle-axis differences,
//! while keyframe anchors stay fixed.
//!
//! Centers and angle-axis vectors are solved as two independent linear
//! least-squares problems (one small dense SPD system shared by all six
//! coordinates).

use nalgebra::{DMatrix, Vector3};
use thiserror::Error;

use crate::geometry::rotation::unwrap_angle_axis;
use crate::geometry::{
    angle_axis_to_rotation, rotation_angle_between, rotation_to_angle_axis, CameraPose,
};

/// Half-width of the smoothing window in frames.
pub const WINDOW_RADIUS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseSmoothingError {
    #[error("trajectory needs at least {min} poses, got {found}")]
    TooShort { min: usize, found: usize },
    #[error("anchor index {index} outside a trajectory of {len} poses")]
    AnchorOutOfRange { index: usize, len: usize },
    #[error("smoothing system is singular (no data weight and an unanchored segment)")]
    SingularSystem,
    #[error("trajectories have different lengths ({estimate} vs {ground_truth})")]
    LengthMismatch {
        estimate: usize,
        ground_truth: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryProblem {
    pub observed: Vec<CameraPose>,
    /// Indices held fixed at their observed pose.
    pub anchors: Vec<usize>,
    pub window_sigma: f64,
    pub data_weight: f64,
    /// Global multiplier on the window weights; zero returns the input.
    pub smoothing_weight: f64,
}

impl TrajectoryProblem {
    /// Anchors every `kappa`-th pose (indices `0, κ, 2κ, …`).
    pub fn with_keyframes(
        observed: Vec<CameraPose>,
        kappa: usize,
        window_sigma: f64,
        data_weight: f64,
    ) -> Self {
        let anchors = (0..observed.len()).step_by(kappa.max(1)).collect();
        Self {
            observed,
            anchors,
            window_sigma,
            data_weight,
            smoothing_weight: 1.0,
        }
    }

    /// `w(Δ) = exp(−Δ² / 2σ²)` scaled by the smoothing weight, zero beyond the window.
    pub fn window_weight(&self, delta: usize) -> f64 {
        if delta == 0 || delta > WINDOW_RADIUS {
            return 0.0;
        }
        let d = delta as f64;
        self.smoothing_weight * (-d * d / (2.0 * self.window_sigma * self.window_sigma)).exp()
    }

    fn validate(&self) -> Result<(), PoseSmoothingError> {
        let n = self.observed.len();
        if n < 2 {
            return Err(PoseSmoothingError::TooShort { min: 2, found: n });
        }
        if let Some(&index) = self.anchors.iter().find(|&&a| a >= n) {
            return Err(PoseSmoothingError::AnchorOutOfRange { index, len: n });
        }
        Ok(())
    }

    /// Observed angle-axis vectors, unwrapped sequentially so neighbours never
    /// differ by a 2π jump.
    pub fn observed_angle_axes(&self) -> Vec<Vector3<f64>> {
        unwrap_sequence(
            self.observed
                .iter()
                .map(|p| rotation_to_angle_axis(&p.rotation)),
        )
    }
}

fn unwrap_sequence(raw: impl Iterator<Item = Vector3<f64>>) -> Vec<Vector3<f64>> {
    let mut out: Vec<Vector3<f64>> = Vec::new();
    for a in raw {
        let next = match out.last() {
            Some(prev) => unwrap_angle_axis(&a, prev),
            None => a,
        };
        out.push(next);
    }
    out
}

/// Angle-axis vectors of `poses` in the chart of the observed trajectory.
fn chart_angle_axes(problem: &TrajectoryProblem, poses: &[CameraPose]) -> Vec<Vector3<f64>> {
    let reference = problem.observed_angle_axes();
    poses
        .iter()
        .zip(&reference)
        .map(|(p, r)| unwrap_angle_axis(&rotation_to_angle_axis(&p.rotation), r))
        .collect()
}

fn objective_terms(problem: &TrajectoryProblem, xs: &[Vector3<f64>], obs: &[Vector3<f64>]) -> f64 {
    let n = xs.len();
    let mut e = 0.0;
    for t in 0..n {
        e += problem.data_weight * (xs[t] - obs[t]).norm_squared();
        for u in t.saturating_sub(WINDOW_RADIUS)..(t + WINDOW_RADIUS + 1).min(n) {
            e += problem.window_weight(t.abs_diff(u)) * (xs[t] - xs[u]).norm_squared();
        }
    }
    e
}

/// The smoothing objective of `poses` (same length as the observation).
pub fn smoothing_objective(problem: &TrajectoryProblem, poses: &[CameraPose]) -> f64 {
    let centers: Vec<_> = poses.iter().map(|p| p.center).collect();
    let obs_centers: Vec<_> = problem.observed.iter().map(|p| p.center).collect();
    let axes = chart_angle_axes(problem, poses);
    let obs_axes = problem.observed_angle_axes();
    objective_terms(problem, &centers, &obs_centers) + objective_terms(problem, &axes, &obs_axes)
}

/// Minimizes the smoothing objective with the anchors fixed.
pub fn smooth_trajectory(
    problem: &TrajectoryProblem,
) -> Result<Vec<CameraPose>, PoseSmoothingError> {
    problem.validate()?;
    let n = problem.observed.len();
    if problem.smoothing_weight == 0.0 {
        return Ok(problem.observed.clone());
    }
    let mut fixed = vec![false; n];
    for &a in &problem.anchors {
        fixed[a] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&t| !fixed[t]).collect();
    if free.is_empty() {
        return Ok(problem.observed.clone());
    }
    let mut slot = vec![usize::MAX; n];
    for (k, &t) in free.iter().enumerate() {
        slot[t] = k;
    }

    // Stationarity: (dw + 2Σw) x_t − 2Σ_{free} w x_u = dw·o_t + 2Σ_{anchored} w·o_u
    let m = free.len();
    let mut h = DMatrix::<f64>::zeros(m, m);
    for (k, &t) in free.iter().enumerate() {
        h[(k, k)] += problem.data_weight;
        for u in t.saturating_sub(WINDOW_RADIUS)..(t + WINDOW_RADIUS + 1).min(n) {
            let w = problem.window_weight(t.abs_diff(u));
            if w == 0.0 {
                continue;
            }
            h[(k, k)] += 2.0 * w;
            if !fixed[u] {
                h[(k, slot[u])] -= 2.0 * w;
            }
        }
    }
    let scale = h.diagonal().amax();
    let chol = h.cholesky().ok_or(PoseSmoothingError::SingularSystem)?;
    // a floating-point factorization of a singular Laplacian can still succeed
    // with a round-off pivot
    if chol
        .l_dirty()
        .diagonal()
        .iter()
        .any(|&p| p * p <= 1e-12 * scale)
    {
        return Err(PoseSmoothingError::SingularSystem);
    }

    let solve = |obs: &[Vector3<f64>]| -> Vec<Vector3<f64>> {
        let mut out = obs.to_vec();
        let mut rhs = DMatrix::<f64>::zeros(m, 3);
        for (k, &t) in free.iter().enumerate() {
            let mut r = obs[t] * problem.data_weight;
            for u in t.saturating_sub(WINDOW_RADIUS)..(t + WINDOW_RADIUS + 1).min(n) {
                if fixed[u] {
                    r += obs[u] * (2.0 * problem.window_weight(t.abs_diff(u)));
                }
            }
            rhs.set_row(k, &r.transpose());
        }
        let x = chol.solve(&rhs);
        for (k, &t) in free.iter().enumerate() {
            out[t] = Vector3::new(x[(k, 0)], x[(k, 1)], x[(k, 2)]);
        }
        out
    };

    let centers = solve(
        &problem
            .observed
            .iter()
            .map(|p| p.center)
            .collect::<Vec<_>>(),
    );
    let axes = solve(&problem.observed_angle_axes());
    Ok(problem
        .observed
        .iter()
        .enumerate()
        .map(|(t, p)| {
            if fixed[t] {
                return p.clone();
            }
            let mut q = p.clone();
            q.center = centers[t];
            q.rotation = angle_axis_to_rotation(&axes[t]);
            q
        })
        .collect())
}

/// Norm of the objective gradient with respect to the free centers and
/// angle-axis vectors of `poses`.
pub fn objective_gradient_norm(problem: &TrajectoryProblem, poses: &[CameraPose]) -> f64 {
    let n = poses.len();
    let fixed: Vec<bool> = (0..n).map(|t| problem.anchors.contains(&t)).collect();
    let grad = |xs: &[Vector3<f64>], obs: &[Vector3<f64>]| -> f64 {
        let mut sq = 0.0;
        for t in (0..n).filter(|&t| !fixed[t]) {
            let mut g = (xs[t] - obs[t]) * (2.0 * problem.data_weight);
            for u in t.saturating_sub(WINDOW_RADIUS)..(t + WINDOW_RADIUS + 1).min(n) {
                g += (xs[t] - xs[u]) * (4.0 * problem.window_weight(t.abs_diff(u)));
            }
            sq += g.norm_squared();
        }
        sq
    };
    let centers: Vec<_> = poses.iter().map(|p| p.center).collect();
    let obs_centers: Vec<_> = problem.observed.iter().map(|p| p.center).collect();
    let axes = chart_angle_axes(problem, poses);
    (grad(&centers, &obs_centers) + grad(&axes, &problem.observed_angle_axes())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryErrors {
    /// Mean Euclidean center distance, in scene units.
    pub position: f64,
    /// Mean geodesic rotation error, degrees.
    pub orientation_deg: f64,
}

pub fn trajectory_errors(
    estimate: &[CameraPose],
    ground_truth: &[CameraPose],
) -> Result<TrajectoryErrors, PoseSmoothingError> {
    if estimate.len() != ground_truth.len() {
        return Err(PoseSmoothingError::LengthMismatch {
            estimate: estimate.len(),
            ground_truth: ground_truth.len(),
        });
    }
    let n = estimate.len().max(1) as f64;
    let (pos, ang) = estimate
        .iter()
        .zip(ground_truth)
        .fold((0.0, 0.0), |(p, a), (e, g)| {
            (
                p + (e.center - g.center).norm(),
                a + rotation_angle_between(&e.rotation, &g.rotation).to_degrees(),
            )
        });
    Ok(TrajectoryErrors {
        position: pos / n,
        orientation_deg: ang / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(c: Vector3<f64>, a: Vector3<f64>) -> CameraPose {
        CameraPose::simple(100.0, (50.0, 40.0), angle_axis_to_rotation(&a), c)
    }

    #[test]
    fn constant_trajectory_is_a_fixed_point() {
        let obs: Vec<_> = (0..10)
            .map(|_| pose(Vector3::new(1.0, 2.0, 3.0), Vector3::new(0.1, 0.2, 0.3)))
            .collect();
        let p = TrajectoryProblem::with_keyframes(obs.clone(), 4, 1.5, 1.0);
        let out = smooth_trajectory(&p).unwrap();
        for (a, b) in out.iter().zip(&obs) {
            assert!((a.center - b.center).norm() < 1e-12);
            assert!((a.rotation - b.rotation).amax() < 1e-12);
        }
        assert!(smoothing_objective(&p, &out) < 1e-20);
    }

    #[test]
    fn vanishing_data_weight_interpolates_between_anchors() {
        // Three collinear anchors at each end make the ±3 window symmetric for
        // every free pose, so the harmonic solution is the straight line.
        let n = 12;
        let end = Vector3::new(6.0, -3.0, 1.5);
        let line = |t: usize| end * (t as f64 / (n - 1) as f64);
        let anchors = vec![0, 1, 2, n - 3, n - 2, n - 1];
        let obs: Vec<_> = (0..n)
            .map(|t| {
                let c = if anchors.contains(&t) {
                    line(t)
                } else {
                    Vector3::new((t * t) as f64, 1.0, -2.0)
                };
                pose(c, Vector3::zeros())
            })
            .collect();
        let p = TrajectoryProblem {
            observed: obs,
            anchors,
            window_sigma: 1.5,
            data_weight: 1e-12,
            smoothing_weight: 1.0,
        };
        let out = smooth_trajectory(&p).unwrap();
        for (t, q) in out.iter().enumerate() {
            assert!((q.center - line(t)).norm() < 1e-6, "t={t}: {:?}", q.center);
        }
    }

    #[test]
    fn zero_smoothing_returns_input() {
        let obs: Vec<_> = (0..5)
            .map(|t| {
                pose(
                    Vector3::new(t as f64, 0.0, 0.0),
                    Vector3::new(0.0, 0.1 * t as f64, 0.0),
                )
            })
            .collect();
        let mut p = TrajectoryProblem::with_keyframes(obs.clone(), 20, 1.5, 1.0);
        p.smoothing_weight = 0.0;
        assert_eq!(smooth_trajectory(&p).unwrap(), obs);
    }

    #[test]
    fn solution_is_stationary_and_not_worse() {
        let obs: Vec<_> = (0..12)
            .map(|t| {
                let s = t as f64;
                pose(
                    Vector3::new(s.sin(), (1.7 * s).cos(), 0.1 * s),
                    Vector3::new(0.05 * s, 0.02 * (s * 3.0).sin(), 0.0),
                )
            })
            .collect();
        let p = TrajectoryProblem::with_keyframes(obs.clone(), 5, 1.5, 1.0);
        let out = smooth_trajectory(&p).unwrap();
        assert!(objective_gradient_norm(&p, &out) < 1e-9);
        assert!(smoothing_objective(&p, &out) < smoothing_objective(&p, &obs));
        for &a in &p.anchors {
            assert_eq!(out[a], obs[a]);
        }
    }

    #[test]
    fn singular_without_data_or_anchors() {
        let obs: Vec<_> = (0..4)
            .map(|t| pose(Vector3::new(t as f64, 0.0, 0.0), Vector3::zeros()))
            .collect();
        let p = TrajectoryProblem {
            observed: obs,
            anchors: vec![],
            window_sigma: 1.5,
            data_weight: 0.0,
            smoothing_weight: 1.0,
        };
        assert_eq!(
            smooth_trajectory(&p),
            Err(PoseSmoothingError::SingularSystem)
        );
    }

    #[test]
    fn error_metrics_closed_forms() {
        let a = pose(Vector3::new(1.0, 0.0, 0.0), Vector3::zeros());
        let errs = trajectory_errors(std::slice::from_ref(&a), std::slice::from_ref(&a)).unwrap();
        assert_eq!((errs.position, errs.orientation_deg), (0.0, 0.0));
        let mut b = a.clone();
        b.rotation =
            angle_axis_to_rotation(&Vector3::new(0.0, 0.0, 2f64.to_radians())) * a.rotation;
        let errs = trajectory_errors(&[b], std::slice::from_ref(&a)).unwrap();
        assert!(errs.position.abs() < 1e-15);
        assert!((errs.orientation_deg - 2.0).abs() < 1e-9);
        assert!(matches!(
            trajectory_errors(&[a.clone(), a.clone()], &[a]),
            Err(PoseSmoothingError::LengthMismatch { .. })
        ));
    }
}
