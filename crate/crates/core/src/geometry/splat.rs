use crate::cloud::TimestepPointCloud;
use crate::grid::{Grid, Rgb};

use super::camera::CameraPose;

/// Sparse depth and color maps produced by projecting a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMaps {
    pub depth: Grid<f64>,
    pub color: Grid<Rgb>,
    pub occupied: Grid<bool>,
}

impl SparseMaps {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            depth: Grid::filled(width, height, 0.0),
            color: Grid::filled(width, height, Rgb::zeros()),
            occupied: Grid::filled(width, height, false),
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.as_slice().iter().filter(|&&o| o).count()
    }

    /// Min and max depth over occupied pixels.
    pub fn depth_range(&self) -> Option<(f64, f64)> {
        self.depth
            .as_slice()
            .iter()
            .zip(self.occupied.as_slice())
            .filter(|(_, &o)| o)
            .fold(None, |acc, (&d, _)| match acc {
                None => Some((d, d)),
                Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
            })
    }
}

/// Projects every point to its nearest pixel with a one-pixel footprint;
/// the smallest depth wins collisions.
pub fn splat_points(
    cloud: &TimestepPointCloud,
    cam: &CameraPose,
    width: usize,
    height: usize,
) -> SparseMaps {
    let mut maps = SparseMaps::empty(width, height);
    for point in &cloud.points {
        let Some((pixel, depth)) = cam.project(&point.position).visible() else {
            continue;
        };
        let Some((x, y)) = pixel.nearest(width, height) else {
            continue;
        };
        if !*maps.occupied.get(x, y) || depth < *maps.depth.get(x, y) {
            maps.occupied.set(x, y, true);
            maps.depth.set(x, y, depth);
            maps.color.set(x, y, point.color);
        }
    }
    maps
}
