//! Analytic test scene with known geometry: a textured back wall, a textured
//! floor and a textured box sliding sideways, seen by an arc of input cameras
//! and a virtual camera moving between them.
//!
//! World axes follow the camera convention: x right, y down, z forward.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cloud::{ColoredPoint, TimestepPointCloud};
use crate::geometry::{intrinsics, CameraPose, Pixel, ViewTag};
use crate::grid::{Grid, Rgb};
use crate::io::{
    save_camera_path, save_dataset, save_frame, save_params, CameraPath, DatasetError, FrameSet,
    RenderedFrame, ViewStream,
};
use crate::params::SolverParams;

const WALL_Z: f64 = 6.0;
const FLOOR_Y: f64 = 1.0;
const BOX_Z: f64 = 3.5;
const ORBIT_CENTER: Vector3<f64> = Vector3::new(0.0, 0.2, BOX_Z);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub views: usize,
    pub frames: usize,
    pub focal: f64,
    /// Total angular spread of the input cameras around the scene center.
    pub arc_degrees: f64,
    pub radius: f64,
    /// Orbit angle of the virtual camera at `t = 0` and its change per frame.
    pub virtual_start_degrees: f64,
    pub virtual_step_degrees: f64,
    pub box_half_extent: f64,
    pub box_start_x: f64,
    /// Box displacement along x per frame; zero gives a static scene.
    pub box_speed: f64,
    /// Probability that a pixel of an input camera contributes a point.
    pub density: f64,
    /// Standard deviation of the depth noise, along the sampling camera's axis.
    pub depth_noise: f64,
    /// Fraction of points whose depth is scaled by a factor in [0.7, 1.3].
    pub outlier_fraction: f64,
    /// Samples per pixel side when rendering color.
    pub supersample: usize,
    /// Solver configuration written next to the dataset.
    pub solver: SolverParams,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            width: 192,
            height: 128,
            views: 5,
            frames: 10,
            focal: 190.0,
            arc_degrees: 60.0,
            radius: 4.0,
            virtual_start_degrees: 6.0,
            virtual_step_degrees: 0.5,
            box_half_extent: 0.5,
            box_start_x: -0.5,
            box_speed: 0.08,
            density: 0.05,
            depth_noise: 0.01,
            outlier_fraction: 0.02,
            supersample: 2,
            solver: SolverParams {
                pyramid_levels: 4,
                ..SolverParams::default()
            },
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.width == 0 || self.height == 0 {
            return Err("image size must be positive".into());
        }
        if self.views < 2 || self.frames < 1 {
            return Err("need at least 2 views and 1 frame".into());
        }
        if !(0.0..=1.0).contains(&self.density) || !(0.0..=1.0).contains(&self.outlier_fraction) {
            return Err("density and outlier_fraction must lie in [0, 1]".into());
        }
        if !(self.depth_noise >= 0.0)
            || !(self.focal > 0.0)
            || !(self.radius > 0.0)
            || self.supersample == 0
        {
            return Err("depth_noise must be >= 0; focal, radius, supersample > 0".into());
        }
        self.solver.validate().map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    /// Ray parameter; equals the camera depth for rays built by [`SyntheticScene::ray`].
    pub depth: f64,
    pub point: Vector3<f64>,
    pub color: Rgb,
}

/// A sampled point together with its noiseless depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledPoint {
    pub point: ColoredPoint,
    pub camera: usize,
    pub true_depth: f64,
    pub sampled_depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub spec: SyntheticSpec,
}

fn smooth_checker(a: f64, b: f64) -> f64 {
    // soft-edged checker in [-1, 1]
    let s = (a * std::f64::consts::PI).sin() * (b * std::f64::consts::PI).sin();
    (s * 6.0).tanh()
}

fn wall_color(x: f64, y: f64) -> Rgb {
    let c = smooth_checker(x / 0.7, y / 0.7);
    Rgb::new(
        0.45 + 0.2 * c + 0.1 * (1.3 * x).sin(),
        0.5 + 0.15 * c + 0.1 * (0.9 * y + 0.5).cos(),
        0.6 - 0.1 * c + 0.08 * (0.7 * x + 0.4 * y).sin(),
    )
}

fn floor_color(x: f64, z: f64) -> Rgb {
    let stripe = (3.0 * (2.0 * x + 0.3 * z).sin()).tanh();
    Rgb::new(
        0.3 + 0.1 * stripe,
        0.35 + 0.05 * (z * 1.5).sin(),
        0.25 + 0.08 * stripe,
    )
}

fn box_color(local: &Vector3<f64>, half: f64) -> Rgb {
    let u = local / half;
    let rings = (4.0 * (u.x + u.y + u.z)).sin();
    let dots = smooth_checker(2.0 * u.x + 0.5, 2.0 * u.y + 2.0 * u.z + 0.5);
    Rgb::new(0.8 + 0.1 * dots, 0.45 + 0.15 * rings, 0.2 + 0.1 * dots)
}

impl SyntheticScene {
    pub fn new(spec: SyntheticSpec) -> Self {
        Self { spec }
    }

    pub fn box_center(&self, t: usize) -> Vector3<f64> {
        let s = &self.spec;
        Vector3::new(
            s.box_start_x + s.box_speed * t as f64,
            FLOOR_Y - s.box_half_extent,
            BOX_Z,
        )
    }

    fn orbit_camera(&self, degrees: f64) -> CameraPose {
        let s = &self.spec;
        let a = degrees.to_radians();
        let eye = ORBIT_CENTER + Vector3::new(s.radius * a.sin(), -0.4, -s.radius * a.cos());
        let k = intrinsics(
            s.focal,
            s.focal,
            (s.width as f64 - 1.0) / 2.0,
            (s.height as f64 - 1.0) / 2.0,
        );
        CameraPose::look_at(k, eye, ORBIT_CENTER, Vector3::new(0.0, 1.0, 0.0))
    }

    /// Input camera `s`; inputs are static over time.
    pub fn input_camera(&self, s: usize, t: usize) -> CameraPose {
        let spec = &self.spec;
        let step = if spec.views > 1 {
            spec.arc_degrees / (spec.views - 1) as f64
        } else {
            0.0
        };
        self.orbit_camera(-spec.arc_degrees / 2.0 + step * s as f64)
            .with_time(t)
            .with_view(ViewTag::Input(s))
    }

    pub fn virtual_camera(&self, t: usize) -> CameraPose {
        let s = &self.spec;
        self.orbit_camera(s.virtual_start_degrees + s.virtual_step_degrees * t as f64)
            .with_time(t)
            .with_view(ViewTag::Virtual)
    }

    /// World-space ray through `pixel`, scaled so its camera-z component is 1.
    pub fn ray(&self, cam: &CameraPose, pixel: Pixel) -> Vector3<f64> {
        cam.rotation.transpose() * cam.unproject_to_camera(pixel, 1.0)
    }

    /// First surface hit along `origin + λ·dir`, `λ > 0`.
    pub fn trace(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, t: usize) -> Option<SurfaceHit> {
        let mut best: Option<(f64, u8)> = None;
        let mut consider = |lambda: f64, id: u8| {
            if lambda > 1e-9 && best.is_none_or(|(b, _)| lambda < b) {
                best = Some((lambda, id));
            }
        };
        if dir.z > 0.0 {
            consider((WALL_Z - origin.z) / dir.z, 0);
        }
        if dir.y > 0.0 {
            consider((FLOOR_Y - origin.y) / dir.y, 1);
        }
        let center = self.box_center(t);
        let half = self.spec.box_half_extent;
        if let Some(lambda) = ray_box(origin, dir, &center, half) {
            consider(lambda, 2);
        }
        let (lambda, id) = best?;
        let p = origin + dir * lambda;
        let color = match id {
            0 => wall_color(p.x, p.y),
            1 => floor_color(p.x, p.z),
            _ => box_color(&(p - center), half),
        };
        Some(SurfaceHit {
            depth: lambda,
            point: p,
            color: color.map(|c| c.clamp(0.0, 1.0)),
        })
    }

    /// Ground-truth color (supersampled) and depth (pixel-center ray) images.
    /// Pixels that hit nothing get black and depth 0.
    pub fn render(&self, cam: &CameraPose, t: usize) -> (Grid<Rgb>, Grid<f64>) {
        let (w, h) = (self.spec.width, self.spec.height);
        let ss = self.spec.supersample;
        let depth = Grid::par_from_fn(w, h, |x, y| {
            let dir = self.ray(cam, Pixel::new(x as f64, y as f64));
            self.trace(&cam.center, &dir, t)
                .map_or(0.0, |hit| hit.depth)
        });
        let color = Grid::par_from_fn(w, h, |x, y| {
            let mut acc = Rgb::zeros();
            for j in 0..ss {
                for i in 0..ss {
                    let du = (i as f64 + 0.5) / ss as f64 - 0.5;
                    let dv = (j as f64 + 0.5) / ss as f64 - 0.5;
                    let dir = self.ray(cam, Pixel::new(x as f64 + du, y as f64 + dv));
                    if let Some(hit) = self.trace(&cam.center, &dir, t) {
                        acc += hit.color;
                    }
                }
            }
            acc / (ss * ss) as f64
        });
        (color, depth)
    }

    fn rng(seed: u64, t: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        rng
    }

    /// Noisy sparse samples of the surfaces seen through the pixel centers of
    /// `cameras` at time `t`. Deterministic in `(seed, t)`.
    pub fn sample_points(&self, cameras: &[CameraPose], t: usize, seed: u64) -> Vec<SampledPoint> {
        let spec = &self.spec;
        let mut rng = Self::rng(seed, t);
        let noise = Normal::new(0.0, spec.depth_noise).expect("finite noise level");
        let mut out = Vec::new();
        for (ci, cam) in cameras.iter().enumerate() {
            for y in 0..spec.height {
                for x in 0..spec.width {
                    // draw every random number unconditionally so the stream
                    // layout does not depend on the scene
                    let keep = rng.random::<f64>() < spec.density;
                    let n = noise.sample(&mut rng);
                    let outlier = rng.random::<f64>() < spec.outlier_fraction;
                    let scale = rng.random_range(0.7..1.3);
                    if !keep {
                        continue;
                    }
                    let dir = self.ray(cam, Pixel::new(x as f64, y as f64));
                    let Some(hit) = self.trace(&cam.center, &dir, t) else {
                        continue;
                    };
                    let mut d = hit.depth + n;
                    if outlier {
                        d *= scale;
                    }
                    if !(d > 0.0) {
                        continue;
                    }
                    out.push(SampledPoint {
                        point: ColoredPoint {
                            position: cam.center + dir * d,
                            color: hit.color,
                        },
                        camera: ci,
                        true_depth: hit.depth,
                        sampled_depth: d,
                    });
                }
            }
        }
        out
    }

    pub fn sample_cloud(&self, cameras: &[CameraPose], t: usize, seed: u64) -> TimestepPointCloud {
        TimestepPointCloud::new(
            t,
            self.sample_points(cameras, t, seed)
                .into_iter()
                .map(|s| s.point)
                .collect(),
        )
    }
}

/// Entry distance of a ray into an axis-aligned cube, if in front of the origin.
fn ray_box(
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    center: &Vector3<f64>,
    half: f64,
) -> Option<f64> {
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    for k in 0..3 {
        let lo = center[k] - half;
        let hi = center[k] + half;
        if dir[k].abs() < 1e-15 {
            if origin[k] < lo || origin[k] > hi {
                return None;
            }
            continue;
        }
        let a = (lo - origin[k]) / dir[k];
        let b = (hi - origin[k]) / dir[k];
        t_min = t_min.max(a.min(b));
        t_max = t_max.min(a.max(b));
    }
    if t_max < t_min || t_max <= 0.0 {
        return None;
    }
    Some(if t_min > 0.0 { t_min } else { t_max })
}

/// A generated dataset held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub spec: SyntheticSpec,
    pub seed: u64,
    pub frames: FrameSet,
    pub clouds: Vec<TimestepPointCloud>,
    pub path: CameraPath,
    /// Ground truth of the virtual camera, one per path pose.
    pub ground_truth: Vec<RenderedFrame>,
}

pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticDataset, String> {
    spec.validate()?;
    let scene = SyntheticScene::new(spec.clone());
    let views = (0..spec.views)
        .map(|s| {
            let (frames, poses) = (0..spec.frames)
                .map(|t| {
                    let cam = scene.input_camera(s, t);
                    (scene.render(&cam, t).0, cam)
                })
                .unzip();
            ViewStream { frames, poses }
        })
        .collect();
    let frames = FrameSet::new(views).map_err(|e| e.to_string())?;
    let clouds = (0..spec.frames)
        .map(|t| scene.sample_cloud(&frames.poses_at(t), t, seed))
        .collect();
    let path = CameraPath {
        poses: (0..spec.frames).map(|t| scene.virtual_camera(t)).collect(),
    };
    let ground_truth = path
        .poses
        .iter()
        .enumerate()
        .map(|(t, cam)| {
            let (color, depth) = scene.render(cam, t);
            RenderedFrame {
                color,
                depth,
                time_index: t,
            }
        })
        .collect();
    Ok(SyntheticDataset {
        spec: spec.clone(),
        seed,
        frames,
        clouds,
        path,
        ground_truth,
    })
}

impl SyntheticDataset {
    /// Writes the dataset layout plus `path/cameras.json`, `gt/`,
    /// `config.json` and `spec.json`.
    pub fn save(&self, root: &Path) -> Result<(), DatasetError> {
        save_dataset(root, &self.frames, &self.clouds)?;
        save_camera_path(&self.path, &root.join("path").join("cameras.json"))?;
        for gt in &self.ground_truth {
            save_frame(gt, &root.join("gt"))?;
        }
        save_params(&self.spec.solver, &root.join("config.json"))?;
        let spec_path = root.join("spec.json");
        let text = serde_json::to_string_pretty(&self.spec).expect("spec serializes");
        fs::write(&spec_path, text).map_err(|source| DatasetError::IoFailure {
            path: spec_path,
            source,
        })
    }
}
