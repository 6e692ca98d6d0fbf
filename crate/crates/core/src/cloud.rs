use nalgebra::Vector3;

use crate::grid::Rgb;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredPoint {
    pub position: Vector3<f64>,
    pub color: Rgb,
}

/// Sparse colored points valid at a single time index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimestepPointCloud {
    pub time_index: usize,
    pub points: Vec<ColoredPoint>,
}

impl TimestepPointCloud {
    pub fn new(time_index: usize, points: Vec<ColoredPoint>) -> Self {
        Self { time_index, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Finite coordinates and colors in [0, 1].
    pub fn is_valid(&self) -> bool {
        self.points.iter().all(|p| {
            p.position.iter().all(|v| v.is_finite())
                && p.color.iter().all(|c| (0.0..=1.0).contains(c))
        })
    }
}
