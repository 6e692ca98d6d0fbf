//! Z-buffer visibility of destination pixels from a source camera.

use crate::grid::Grid;

use super::camera::CameraPose;
use super::warp::{source_hits, SourceHit};

/// Relative z-buffer tolerance, as a fraction of the source-frame depth range.
pub const Z_TOLERANCE_FRACTION: f64 = 1e-4;

/// `σ_vis(x) = 1` iff `x` attains the minimal source-frame depth (within the
/// z tolerance) among all destination pixels landing on the same integer
/// source pixel. Pixels projecting outside the source image get 0.
pub fn visibility_maps(
    dst_cam: &CameraPose,
    dst_depth: &Grid<f64>,
    src_cam: &CameraPose,
    src_width: usize,
    src_height: usize,
) -> Grid<bool> {
    let hits = source_hits(dst_cam, dst_depth, src_cam);
    visibility_from_hits(&hits, src_width, src_height)
}

pub fn visibility_from_hits(
    hits: &Grid<Option<SourceHit>>,
    src_width: usize,
    src_height: usize,
) -> Grid<bool> {
    let targets = hits.map(|h| {
        h.and_then(|hit| {
            hit.pixel
                .nearest(src_width, src_height)
                .map(|(x, y)| (y * src_width + x, hit.depth))
        })
    });
    let mut zbuf = vec![f64::INFINITY; src_width * src_height];
    let mut range: Option<(f64, f64)> = None;
    for &(idx, depth) in targets.as_slice().iter().flatten() {
        if depth < zbuf[idx] {
            zbuf[idx] = depth;
        }
        range = Some(match range {
            None => (depth, depth),
            Some((lo, hi)) => (lo.min(depth), hi.max(depth)),
        });
    }
    let eps = range.map_or(0.0, |(lo, hi)| Z_TOLERANCE_FRACTION * (hi - lo));
    targets.map(|t| t.is_some_and(|(idx, depth)| depth <= zbuf[idx] + eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Vector3};

    #[test]
    fn fronto_parallel_plane_fully_visible() {
        let cam = CameraPose::simple(30.0, (15.5, 11.5), Matrix3::identity(), Vector3::zeros());
        let depth = Grid::filled(32, 24, 2.0);
        let vis = visibility_maps(&cam, &depth, &cam, 32, 24);
        assert!(vis.as_slice().iter().all(|&v| v));
    }

    #[test]
    fn outside_source_frustum_is_invisible() {
        let dst = CameraPose::simple(30.0, (15.5, 11.5), Matrix3::identity(), Vector3::zeros());
        let src = CameraPose::simple(
            30.0,
            (15.5, 11.5),
            Matrix3::identity(),
            Vector3::new(1.0, 0.0, 0.0),
        );
        let depth = Grid::filled(32, 24, 2.0);
        let vis = visibility_maps(&dst, &depth, &src, 32, 24);
        // shift of 15 px: the left columns fall off the source image
        assert!(!*vis.get(0, 10));
        assert!(*vis.get(31, 10));
    }
}
