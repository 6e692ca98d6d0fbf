use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Continuous image coordinates, origin at the center of the top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl Pixel {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Nearest integer pixel, if inside a `width × height` image.
    pub fn nearest(&self, width: usize, height: usize) -> Option<(usize, usize)> {
        let x = self.u.round();
        let y = self.v.round();
        if x >= 0.0 && y >= 0.0 && (x as usize) < width && (y as usize) < height {
            Some((x as usize, y as usize))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSample {
    pub pixel: Pixel,
    /// Distance along the camera z axis, strictly positive.
    pub depth: f64,
}

/// Outcome of projecting a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Visible { pixel: Pixel, depth: f64 },
    Behind,
}

impl Projection {
    pub fn visible(self) -> Option<(Pixel, f64)> {
        match self {
            Projection::Visible { pixel, depth } => Some((pixel, depth)),
            Projection::Behind => None,
        }
    }
}

/// Which camera a pose belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViewTag {
    Input(usize),
    Virtual,
}

/// Pinhole camera: `x_cam = R (p - C)`, `pixel = K x_cam / z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    pub intrinsics: Matrix3<f64>,
    /// World-to-camera rotation.
    pub rotation: Matrix3<f64>,
    /// Camera center in world coordinates.
    pub center: Vector3<f64>,
    pub time_index: usize,
    pub view: ViewTag,
}

const ORTHONORMAL_TOL: f64 = 1e-9;

impl CameraPose {
    /// Validating constructor.
    pub fn new(
        intrinsics: Matrix3<f64>,
        rotation: Matrix3<f64>,
        center: Vector3<f64>,
        time_index: usize,
        view: ViewTag,
    ) -> Result<Self, GeometryError> {
        let cam = Self {
            intrinsics,
            rotation,
            center,
            time_index,
            view,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera with `K = [[f, 0, cx], [0, f, cy], [0, 0, 1]]`.
    pub fn simple(
        focal: f64,
        principal: (f64, f64),
        rotation: Matrix3<f64>,
        center: Vector3<f64>,
    ) -> Self {
        Self {
            intrinsics: intrinsics(focal, focal, principal.0, principal.1),
            rotation,
            center,
            time_index: 0,
            view: ViewTag::Virtual,
        }
    }

    /// Camera at `eye` looking at `target`, with image y pointing along `down`
    /// as closely as possible.
    pub fn look_at(
        intrinsics: Matrix3<f64>,
        eye: Vector3<f64>,
        target: Vector3<f64>,
        down: Vector3<f64>,
    ) -> Self {
        let z = (target - eye).normalize();
        let x = down.cross(&z).normalize();
        let y = z.cross(&x);
        let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        Self {
            intrinsics,
            rotation,
            center: eye,
            time_index: 0,
            view: ViewTag::Virtual,
        }
    }

    pub fn with_time(mut self, t: usize) -> Self {
        self.time_index = t;
        self
    }

    pub fn with_view(mut self, view: ViewTag) -> Self {
        self.view = view;
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let k = &self.intrinsics;
        if k.iter().any(|v| !v.is_finite())
            || self.rotation.iter().any(|v| !v.is_finite())
            || self.center.iter().any(|v| !v.is_finite())
        {
            return Err(GeometryError::NonFinitePose);
        }
        if k[(1, 0)] != 0.0 || k[(2, 0)] != 0.0 || k[(2, 1)] != 0.0 {
            return Err(GeometryError::BadIntrinsics("lower triangle must be zero"));
        }
        if k[(0, 0)] <= 0.0 || k[(1, 1)] <= 0.0 || k[(2, 2)] <= 0.0 {
            return Err(GeometryError::BadIntrinsics(
                "focal entries must be positive",
            ));
        }
        let r = &self.rotation;
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        let det = r.determinant();
        if err > ORTHONORMAL_TOL || (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(GeometryError::NotARotation { err, det });
        }
        Ok(())
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * (p - self.center)
    }

    pub fn camera_to_world(&self, q: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * q + self.center
    }

    pub fn project(&self, p: &Vector3<f64>) -> Projection {
        let q = self.world_to_camera(p);
        if q.z <= 0.0 || !q.z.is_finite() {
            return Projection::Behind;
        }
        let h = self.intrinsics * q;
        Projection::Visible {
            pixel: Pixel::new(h.x / h.z, h.y / h.z),
            depth: q.z,
        }
    }

    /// Camera-frame point at `depth` along the ray through `pixel`.
    pub fn unproject_to_camera(&self, pixel: Pixel, depth: f64) -> Vector3<f64> {
        let k = &self.intrinsics;
        let (fx, s, cx) = (k[(0, 0)], k[(0, 1)], k[(0, 2)]);
        let (fy, cy) = (k[(1, 1)], k[(1, 2)]);
        let k22 = k[(2, 2)];
        // solve K q = depth·[u, v, 1]ᵀ·k22 for the upper-triangular K
        let z = depth;
        let y = (pixel.v * k22 * z - cy * z) / fy;
        let x = (pixel.u * k22 * z - s * y - cx * z) / fx;
        Vector3::new(x, y, z)
    }

    /// Inverse of [`project`](Self::project) for a positive depth.
    pub fn unproject(&self, sample: DepthSample) -> Vector3<f64> {
        debug_assert!(sample.depth > 0.0);
        self.camera_to_world(&self.unproject_to_camera(sample.pixel, sample.depth))
    }

    /// Unit viewing direction (camera +z) in world coordinates.
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation.row(2).transpose()
    }

    /// Intrinsics for pyramid level `level` (pixel centers on integers, 2×2 box
    /// downsampling per level).
    pub fn at_level(&self, level: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..level {
            let k = &mut out.intrinsics;
            let k22 = k[(2, 2)];
            for c in 0..2 {
                k[(0, c)] *= 0.5;
                k[(1, c)] *= 0.5;
            }
            k[(0, 2)] = (k[(0, 2)] - 0.5 * k22) * 0.5;
            k[(1, 2)] = (k[(1, 2)] - 0.5 * k22) * 0.5;
        }
        out
    }

    /// Applies the world transform `p ↦ s·Q p + t` to the pose.
    pub fn transformed(&self, q: &Matrix3<f64>, t: &Vector3<f64>, scale: f64) -> Self {
        let mut out = self.clone();
        out.rotation = self.rotation * q.transpose();
        out.center = scale * (q * self.center) + t;
        out
    }

    pub fn point(&self) -> Point3<f64> {
        Point3::from(self.center)
    }
}

pub fn intrinsics(fx: f64, fy: f64, cx: f64, cy: f64) -> Matrix3<f64> {
    Matrix3::new(fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0)
}
