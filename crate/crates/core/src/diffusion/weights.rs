//! Per-pixel confidence weights steering the depth and color solves.

use crate::geometry::{Reprojection, SparseMaps, WarpedImage};
use crate::grid::{color_gradient_sq, Grid, Rgb};
use crate::params::{Ablation, SolverParams};

use super::problem::FrameProblem;

/// Regularizer of the color gradient magnitude in the depth smoothness weight.
pub const EPS_GRAD: f64 = 1e-3;
/// Regularizer of the summed projection weights in the depth smoothness weight.
pub const EPS_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMaps {
    /// Depth smoothness modulation, `≥ 0`.
    pub w_d: Grid<f64>,
    /// Sparse-depth confidence in `[0, 1]`, zero off the sparse samples.
    pub w_hat_d: Grid<f64>,
    /// Per-source projection confidence in `[0, 1]`.
    pub w_p: Vec<Grid<f64>>,
    /// Per-source visibility.
    pub visibility: Vec<Grid<bool>>,
    /// Temporal confidence in `[0, 1]`; all zero without a previous frame.
    pub w_t: Grid<f64>,
}

impl WeightMaps {
    /// True when every map respects its documented range.
    pub fn in_range(&self) -> bool {
        let unit = |g: &Grid<f64>| g.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v));
        unit(&self.w_hat_d)
            && unit(&self.w_t)
            && self.w_p.iter().all(unit)
            && self
                .w_d
                .as_slice()
                .iter()
                .all(|&v| v >= 0.0 && v.is_finite())
    }
}

/// `exp(−‖a − b‖² / 2σ²)`.
#[inline]
pub fn color_agreement(a: &Rgb, b: &Rgb, sigma: f64) -> f64 {
    (-(a - b).norm_squared() / (2.0 * sigma * sigma)).exp()
}

pub fn compute_w_hat_d(sparse: &SparseMaps, color: &Grid<Rgb>, sigma: f64) -> Grid<f64> {
    let (w, h) = color.dims();
    Grid::par_from_fn(w, h, |x, y| {
        if *sparse.occupied.get(x, y) {
            color_agreement(sparse.color.get(x, y), color.get(x, y), sigma)
        } else {
            0.0
        }
    })
}

pub fn compute_w_p(
    warped: &WarpedImage,
    color: &Grid<Rgb>,
    visibility: &Grid<bool>,
    sigma: f64,
) -> Grid<f64> {
    let (w, h) = color.dims();
    Grid::par_from_fn(w, h, |x, y| {
        if *visibility.get(x, y) && *warped.valid.get(x, y) {
            color_agreement(warped.image.get(x, y), color.get(x, y), sigma)
        } else {
            0.0
        }
    })
}

/// `(Σ w_P + ε_w) / ((‖∇I‖² + ε_g) · max(Σ σ_vis, 1))`, or `1 / (‖∇I‖² + ε_g)`
/// where no source sees the pixel. `grad_sq = None` drops the gradient factor.
pub fn compute_w_d(
    grad_sq: Option<&Grid<f64>>,
    w_p: &[Grid<f64>],
    visibility: &[Grid<bool>],
    dims: (usize, usize),
) -> Grid<f64> {
    let (w, h) = dims;
    Grid::par_from_fn(w, h, |x, y| {
        let inv_grad = grad_sq.map_or(1.0, |g| 1.0 / (g.get(x, y) + EPS_GRAD));
        let vis: usize = visibility.iter().filter(|v| *v.get(x, y)).count();
        if vis == 0 {
            return inv_grad;
        }
        let sum_wp: f64 = w_p.iter().map(|g| g.get(x, y)).sum();
        (sum_wp + EPS_WEIGHT) * inv_grad / vis as f64
    })
}

/// Median over the frame of `1 / (‖∇I‖² + ε_g)`.
pub fn median_inverse_gradient(grad_sq: &Grid<f64>) -> f64 {
    let mut v: Vec<f64> = grad_sq
        .as_slice()
        .iter()
        .map(|g| 1.0 / (g + EPS_GRAD))
        .collect();
    if v.is_empty() {
        return 1.0;
    }
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Mean agreement between the reprojected previous color and each validly
/// warped source; zero where the reprojection is invalid and one where no
/// source covers the pixel.
pub fn compute_w_t(previous: &Reprojection, warped: &[WarpedImage], sigma: f64) -> Grid<f64> {
    let (w, h) = previous.color.dims();
    Grid::par_from_fn(w, h, |x, y| {
        if !*previous.valid.get(x, y) {
            return 0.0;
        }
        let prev = previous.color.get(x, y);
        let (sum, count) = warped
            .iter()
            .filter(|s| *s.valid.get(x, y))
            .fold((0.0, 0usize), |(acc, n), s| {
                (acc + color_agreement(prev, s.image.get(x, y), sigma), n + 1)
            });
        if count == 0 {
            1.0
        } else {
            sum / count as f64
        }
    })
}

/// All weights for the current color estimate, with ablation switches applied.
pub fn compute_weights(
    problem: &FrameProblem,
    color: &Grid<Rgb>,
    params: &SolverParams,
    ablation: &Ablation,
) -> WeightMaps {
    let dims = color.dims();
    let sigma = params.sigma;
    let w_hat_d = if ablation.no_pc_weights {
        problem.sparse.occupied.map(|&o| if o { 1.0 } else { 0.0 })
    } else {
        compute_w_hat_d(&problem.sparse, color, sigma)
    };
    let w_p: Vec<Grid<f64>> = problem
        .warped
        .iter()
        .zip(&problem.visibility)
        .map(|(warped, vis)| {
            if ablation.no_proj_weights {
                Grid::par_from_fn(dims.0, dims.1, |x, y| {
                    if *vis.get(x, y) && *warped.valid.get(x, y) {
                        1.0
                    } else {
                        0.0
                    }
                })
            } else {
                compute_w_p(warped, color, vis, sigma)
            }
        })
        .collect();
    let w_d = if ablation.no_depth_weights {
        Grid::filled(dims.0, dims.1, 1.0)
    } else if ablation.no_image_grads {
        compute_w_d(None, &w_p, &problem.visibility, dims)
    } else {
        let grad = color_gradient_sq(color);
        let mut w_d = compute_w_d(Some(&grad), &w_p, &problem.visibility, dims);
        if params.normalize_depth_weights {
            let scale = median_inverse_gradient(&grad);
            w_d.as_mut_slice().iter_mut().for_each(|v| *v /= scale);
        }
        w_d
    };
    let w_t = match (&problem.previous, ablation.no_temporal) {
        (Some(prev), false) => compute_w_t(prev, &problem.warped, sigma),
        _ => Grid::filled(dims.0, dims.1, 0.0),
    };
    WeightMaps {
        w_d,
        w_hat_d,
        w_p,
        visibility: problem.visibility.clone(),
        w_t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warped(img: Grid<Rgb>) -> WarpedImage {
        let (w, h) = img.dims();
        WarpedImage {
            image: img,
            valid: Grid::filled(w, h, true),
        }
    }

    #[test]
    fn sparse_confidence_closed_forms() {
        let mut sparse = SparseMaps::empty(3, 1);
        sparse.occupied.set(0, 0, true);
        sparse.occupied.set(1, 0, true);
        sparse.color.set(0, 0, Rgb::new(0.5, 0.5, 0.5));
        sparse.color.set(1, 0, Rgb::new(0.575, 0.5, 0.5));
        let color = Grid::filled(3, 1, Rgb::new(0.5, 0.5, 0.5));
        let w = compute_w_hat_d(&sparse, &color, 0.075);
        assert_eq!(*w.get(0, 0), 1.0);
        assert!((w.get(1, 0) - (-0.5f64).exp()).abs() < 1e-12);
        assert_eq!(*w.get(2, 0), 0.0);
    }

    #[test]
    fn projection_weight_closed_forms() {
        let color = Grid::filled(2, 1, Rgb::zeros());
        let src = warped(Grid::from_vec(
            2,
            1,
            vec![Rgb::zeros(), Rgb::new(0.15, 0.0, 0.0)],
        ));
        let vis = Grid::filled(2, 1, true);
        let w = compute_w_p(&src, &color, &vis, 0.075);
        assert_eq!(*w.get(0, 0), 1.0);
        assert!((w.get(1, 0) - (-2.0f64).exp()).abs() < 1e-12);
        let hidden = compute_w_p(&src, &color, &Grid::filled(2, 1, false), 0.075);
        assert!(hidden.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn depth_weight_closed_forms() {
        let w_p = vec![Grid::filled(1, 1, 1.0); 4];
        let vis = vec![Grid::filled(1, 1, true); 4];
        let flat = compute_w_d(Some(&Grid::filled(1, 1, 0.0)), &w_p, &vis, (1, 1));
        assert!((flat.get(0, 0) - (4.0 + EPS_WEIGHT) / (EPS_GRAD * 4.0)).abs() < 1e-6);
        let edge = compute_w_d(Some(&Grid::filled(1, 1, 1.0)), &w_p, &vis, (1, 1));
        assert!((edge.get(0, 0) - (4.0 + EPS_WEIGHT) / ((1.0 + EPS_GRAD) * 4.0)).abs() < 1e-12);
        assert!((edge.get(0, 0) - 1.0).abs() < 1.1 * EPS_GRAD);
        let unseen = compute_w_d(
            Some(&Grid::filled(1, 1, 1.0)),
            &w_p,
            &vec![Grid::filled(1, 1, false); 4],
            (1, 1),
        );
        assert!((unseen.get(0, 0) - 1.0 / (1.0 + EPS_GRAD)).abs() < 1e-12);
    }

    #[test]
    fn temporal_weight_closed_forms() {
        let prev = Reprojection {
            color: Grid::filled(2, 1, Rgb::zeros()),
            depth: Grid::filled(2, 1, 1.0),
            valid: Grid::from_vec(2, 1, vec![true, false]),
        };
        let moved = warped(Grid::filled(2, 1, Rgb::new(0.3, 0.0, 0.0)));
        let w = compute_w_t(&prev, std::slice::from_ref(&moved), 0.075);
        assert!((w.get(0, 0) - (-8.0f64).exp()).abs() < 1e-12);
        assert_eq!(*w.get(1, 0), 0.0);
        let agree = warped(Grid::filled(2, 1, Rgb::zeros()));
        let far = warped(Grid::filled(2, 1, Rgb::new(1.0, 1.0, 1.0)));
        let half = compute_w_t(&prev, &[agree.clone(), far.clone(), agree, far], 0.075);
        assert!((half.get(0, 0) - 0.5).abs() < 1e-12);
    }
}
