//! Shared fixtures and independent oracles for the integration tests.
//!
//! The dense oracle below builds the Hessian and gradient of each energy by
//! summing its terms one at a time, directly from their definitions. It shares
//! nothing with the stencil assembly it is compared against.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nvs_diffusion::diffusion::{FrameProblem, WeightMaps};
use nvs_diffusion::geometry::{Reprojection, SparseMaps, WarpedImage};
use nvs_diffusion::pipeline::SyntheticSpec;
use nvs_diffusion::{Grid, Rgb, SolverParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_rgb(rng: &mut ChaCha8Rng) -> Rgb {
    Rgb::new(rng.random(), rng.random(), rng.random())
}

/// `draw` where `mask` is set, zero elsewhere.
fn gated(
    rng: &mut ChaCha8Rng,
    mask: &Grid<bool>,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Grid<f64> {
    Grid::from_fn(mask.width(), mask.height(), |x, y| {
        if *mask.get(x, y) {
            draw(rng)
        } else {
            0.0
        }
    })
}

/// A random single-frame problem with arbitrary (but in-range) weights.
/// `sparse_fraction` of the pixels carry a sparse sample.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    width: usize,
    height: usize,
    sources: usize,
    with_previous: bool,
    sparse_fraction: f64,
) -> (FrameProblem, WeightMaps) {
    let occupied = Grid::from_fn(width, height, |_, _| rng.random_bool(sparse_fraction));
    // guarantee at least one sample
    let mut occupied = occupied;
    occupied.set(width / 2, height / 2, true);
    let sparse = SparseMaps {
        depth: Grid::from_fn(width, height, |x, y| {
            if *occupied.get(x, y) {
                rng.random_range(1.0..5.0)
            } else {
                0.0
            }
        }),
        color: Grid::from_fn(width, height, |_, _| random_rgb(rng)),
        occupied: occupied.clone(),
    };
    let warped: Vec<WarpedImage> = (0..sources)
        .map(|_| WarpedImage {
            image: Grid::from_fn(width, height, |_, _| random_rgb(rng)),
            valid: Grid::from_fn(width, height, |_, _| rng.random_bool(0.85)),
        })
        .collect();
    let visibility: Vec<Grid<bool>> = warped
        .iter()
        .map(|w| {
            Grid::from_fn(width, height, |x, y| {
                *w.valid.get(x, y) && rng.random_bool(0.9)
            })
        })
        .collect();
    let previous = with_previous.then(|| Reprojection {
        color: Grid::from_fn(width, height, |_, _| random_rgb(rng)),
        depth: Grid::from_fn(width, height, |_, _| rng.random_range(1.0..5.0)),
        valid: Grid::from_fn(width, height, |_, _| rng.random_bool(0.8)),
    });
    let w_p: Vec<Grid<f64>> = visibility
        .iter()
        .map(|vis| gated(rng, vis, |r| r.random::<f64>()))
        .collect();
    let w_t = match &previous {
        Some(p) => gated(rng, &p.valid, |r| r.random::<f64>()),
        None => Grid::filled(width, height, 0.0),
    };
    let weights = WeightMaps {
        w_d: Grid::from_fn(width, height, |_, _| rng.random_range(0.05..3.0)),
        w_hat_d: gated(rng, &occupied, |r| r.random_range(0.1..1.0)),
        w_p,
        visibility: visibility.clone(),
        w_t,
    };
    let problem = FrameProblem {
        sparse,
        warped,
        visibility,
        previous,
    };
    (problem, weights)
}

/// `E(z) = ½ zᵀ H z − bᵀ z + c`, so `∇E = H z − b`.
pub struct DenseQuadratic {
    pub hessian: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl DenseQuadratic {
    fn new(n: usize) -> Self {
        Self {
            hessian: DMatrix::zeros(n, n),
            rhs: DVector::zeros(n),
        }
    }

    /// Adds `w (z_i − t)²`.
    fn unary(&mut self, i: usize, w: f64, t: f64) {
        self.hessian[(i, i)] += 2.0 * w;
        self.rhs[i] += 2.0 * w * t;
    }

    /// Adds `w (z_j − z_i − g)²`.
    fn pair(&mut self, i: usize, j: usize, w: f64, g: f64) {
        self.hessian[(i, i)] += 2.0 * w;
        self.hessian[(j, j)] += 2.0 * w;
        self.hessian[(i, j)] -= 2.0 * w;
        self.hessian[(j, i)] -= 2.0 * w;
        self.rhs[i] -= 2.0 * w * g;
        self.rhs[j] += 2.0 * w * g;
    }

    pub fn gradient(&self, z: &[f64]) -> DVector<f64> {
        &self.hessian * DVector::from_column_slice(z) - &self.rhs
    }

    /// Direct solve by Cholesky factorization.
    pub fn solve(&self) -> Vec<f64> {
        let chol = self
            .hessian
            .clone()
            .cholesky()
            .expect("energy Hessian is positive definite");
        chol.solve(&self.rhs).as_slice().to_vec()
    }
}

fn forward_neighbours(w: usize, h: usize, x: usize, y: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(2);
    if x + 1 < w {
        out.push((x + 1, y));
    }
    if y + 1 < h {
        out.push((x, y + 1));
    }
    out
}

/// Depth energy: for every pixel `x` and each forward neighbour `n`,
/// `w_D(x)(D(n) − D(x))²`; plus `λ_PC w_D̂ (D − D̂)²` and `λ_T w_T (D − D_prev)²`.
pub fn dense_depth(
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
) -> DenseQuadratic {
    let (w, h) = problem.dims();
    let idx = |x: usize, y: usize| y * w + x;
    let mut q = DenseQuadratic::new(w * h);
    for y in 0..h {
        for x in 0..w {
            for (nx, ny) in forward_neighbours(w, h, x, y) {
                q.pair(idx(x, y), idx(nx, ny), *weights.w_d.get(x, y), 0.0);
            }
            q.unary(
                idx(x, y),
                params.lambda_pc * weights.w_hat_d.get(x, y),
                *problem.sparse.depth.get(x, y),
            );
            if let Some(prev) = &problem.previous {
                q.unary(
                    idx(x, y),
                    params.lambda_t * weights.w_t.get(x, y),
                    *prev.depth.get(x, y),
                );
            }
        }
    }
    q
}

/// One channel of the color energy: unit smoothness on every edge; for every
/// source, `λ_G min(w_P(x), w_P(n)) (∇I − ∇I_s)²` on edges and
/// `λ_P w_P (I − I_s)²` on pixels; `λ_T w_T (I − I_prev)²`.
pub fn dense_color_channel(
    problem: &FrameProblem,
    weights: &WeightMaps,
    params: &SolverParams,
    channel: usize,
) -> DenseQuadratic {
    let (w, h) = problem.dims();
    let idx = |x: usize, y: usize| y * w + x;
    let mut q = DenseQuadratic::new(w * h);
    for y in 0..h {
        for x in 0..w {
            for (nx, ny) in forward_neighbours(w, h, x, y) {
                q.pair(idx(x, y), idx(nx, ny), 1.0, 0.0);
                for (src, wp) in problem.warped.iter().zip(&weights.w_p) {
                    let edge = wp.get(x, y).min(*wp.get(nx, ny));
                    let g = src.image.get(nx, ny)[channel] - src.image.get(x, y)[channel];
                    q.pair(idx(x, y), idx(nx, ny), params.lambda_g * edge, g);
                }
            }
            for (src, wp) in problem.warped.iter().zip(&weights.w_p) {
                q.unary(
                    idx(x, y),
                    params.lambda_p * wp.get(x, y),
                    src.image.get(x, y)[channel],
                );
            }
            if let Some(prev) = &problem.previous {
                q.unary(
                    idx(x, y),
                    params.lambda_t * weights.w_t.get(x, y),
                    prev.color.get(x, y)[channel],
                );
            }
        }
    }
    q
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Moving-box scene used for the end-to-end quality checks.
pub fn moving_box_spec() -> SyntheticSpec {
    SyntheticSpec::default()
}

/// The moving-box scene, shortened. Points sampled from the input cameras
/// include wall points that the box hides from the virtual camera, so the
/// sparse data contains occluded samples.
pub fn occlusion_spec() -> SyntheticSpec {
    SyntheticSpec {
        frames: 5,
        ..SyntheticSpec::default()
    }
}

/// Nothing moves: the box is still and the virtual camera holds its pose.
/// Frame-to-frame changes come only from the independent per-timestep clouds.
pub fn static_spec() -> SyntheticSpec {
    SyntheticSpec {
        box_speed: 0.0,
        virtual_step_degrees: 0.0,
        ..SyntheticSpec::default()
    }
}

/// A small scene for cheap end-to-end runs.
pub fn small_spec() -> SyntheticSpec {
    let mut spec = SyntheticSpec {
        width: 64,
        height: 48,
        focal: 64.0,
        frames: 3,
        ..SyntheticSpec::default()
    };
    spec.solver.pyramid_levels = 2;
    spec
}
