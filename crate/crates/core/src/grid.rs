//! Dense row-major 2D fields over the image domain.

use nalgebra::Vector3;
use rayon::prelude::*;

/// Linear RGB in [0, 1].
pub type Rgb = Vector3<f64>;

/// A dense `width × height` field stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    /// Wraps an existing buffer. Panics if the length does not match.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "grid buffer length mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, T> {
        self.data.chunks(self.width.max(1))
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_dims<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

impl<T: Send + Sync> Grid<T> {
    /// Builds a grid by evaluating `f(x, y)` in parallel over rows.
    pub fn par_from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> T + Sync) -> Self {
        let data: Vec<T> = (0..height)
            .into_par_iter()
            .flat_map_iter(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            data,
        }
    }
}

impl Grid<f64> {
    /// Bilinear sample at continuous coordinates with pixel centers on integers.
    ///
    /// Returns `None` outside `[0, w-1] × [0, h-1]` (with a 1e-9 border slack).
    pub fn sample_bilinear(&self, u: f64, v: f64) -> Option<f64> {
        let (x0, y0, fx, fy) = bilinear_cell(self.width, self.height, u, v)?;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let a = *self.get(x0, y0);
        let b = *self.get(x1, y0);
        let c = *self.get(x0, y1);
        let d = *self.get(x1, y1);
        Some((a * (1.0 - fx) + b * fx) * (1.0 - fy) + (c * (1.0 - fx) + d * fx) * fy)
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.data.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

impl Grid<Rgb> {
    pub fn sample_bilinear(&self, u: f64, v: f64) -> Option<Rgb> {
        let (x0, y0, fx, fy) = bilinear_cell(self.width, self.height, u, v)?;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let a = self.get(x0, y0);
        let b = self.get(x1, y0);
        let c = self.get(x0, y1);
        let d = self.get(x1, y1);
        Some((a * (1.0 - fx) + b * fx) * (1.0 - fy) + (c * (1.0 - fx) + d * fx) * fy)
    }

    /// Splits into three scalar channel grids.
    pub fn channels(&self) -> [Grid<f64>; 3] {
        [0, 1, 2].map(|c| self.map(|p| p[c]))
    }

    pub fn from_channels(channels: &[Grid<f64>; 3]) -> Self {
        let (w, h) = channels[0].dims();
        let data = (0..w * h)
            .map(|i| {
                Rgb::new(
                    channels[0].data[i],
                    channels[1].data[i],
                    channels[2].data[i],
                )
            })
            .collect();
        Grid::from_vec(w, h, data)
    }

    pub fn clamp01(&self) -> Self {
        self.map(|p| p.map(|c| c.clamp(0.0, 1.0)))
    }
}

const BORDER_SLACK: f64 = 1e-9;

fn bilinear_cell(width: usize, height: usize, u: f64, v: f64) -> Option<(usize, usize, f64, f64)> {
    if width == 0 || height == 0 || !u.is_finite() || !v.is_finite() {
        return None;
    }
    let max_u = (width - 1) as f64;
    let max_v = (height - 1) as f64;
    if u < -BORDER_SLACK
        || v < -BORDER_SLACK
        || u > max_u + BORDER_SLACK
        || v > max_v + BORDER_SLACK
    {
        return None;
    }
    let u = u.clamp(0.0, max_u);
    let v = v.clamp(0.0, max_v);
    let x0 = (u.floor() as usize).min(width.saturating_sub(2));
    let y0 = (v.floor() as usize).min(height.saturating_sub(2));
    let fx = if width > 1 { u - x0 as f64 } else { 0.0 };
    let fy = if height > 1 { v - y0 as f64 } else { 0.0 };
    Some((x0, y0, fx, fy))
}

/// Forward-difference gradient pair with homogeneous Neumann boundary
/// (the difference leaving the last column/row is zero).
pub fn forward_gradient(g: &Grid<f64>, x: usize, y: usize) -> (f64, f64) {
    let v = *g.get(x, y);
    let dx = if x + 1 < g.width() {
        g.get(x + 1, y) - v
    } else {
        0.0
    };
    let dy = if y + 1 < g.height() {
        g.get(x, y + 1) - v
    } else {
        0.0
    };
    (dx, dy)
}

/// Squared norm of the forward-difference color gradient, summed over channels.
pub fn color_gradient_sq(img: &Grid<Rgb>) -> Grid<f64> {
    let (w, h) = img.dims();
    Grid::par_from_fn(w, h, |x, y| {
        let p = img.get(x, y);
        let dx = if x + 1 < w {
            img.get(x + 1, y) - p
        } else {
            Rgb::zeros()
        };
        let dy = if y + 1 < h {
            img.get(x, y + 1) - p
        } else {
            Rgb::zeros()
        };
        dx.norm_squared() + dy.norm_squared()
    })
}
