//! Backward warping of a source frame into a destination view through the
//! destination depth map: `I_src(C_src C_dst⁻¹(x, d(x)))`.

use crate::grid::{Grid, Rgb};

use super::camera::{CameraPose, DepthSample, Pixel};

/// Where each destination pixel lands in the source camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceHit {
    pub pixel: Pixel,
    /// Depth in the source camera frame.
    pub depth: f64,
}

/// For each destination pixel with a positive finite depth, the source-frame
/// pixel and depth of its 3D point; `None` when the depth is invalid or the
/// point is behind the source camera.
pub fn source_hits(
    dst_cam: &CameraPose,
    dst_depth: &Grid<f64>,
    src_cam: &CameraPose,
) -> Grid<Option<SourceHit>> {
    let (w, h) = dst_depth.dims();
    Grid::par_from_fn(w, h, |x, y| {
        let d = *dst_depth.get(x, y);
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        let world = dst_cam.unproject(DepthSample {
            pixel: Pixel::new(x as f64, y as f64),
            depth: d,
        });
        src_cam
            .project(&world)
            .visible()
            .map(|(pixel, depth)| SourceHit { pixel, depth })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpedImage {
    pub image: Grid<Rgb>,
    pub valid: Grid<bool>,
}

impl WarpedImage {
    pub fn valid_count(&self) -> usize {
        self.valid.as_slice().iter().filter(|&&v| v).count()
    }
}

/// Bilinearly resamples `src_img` into the destination view. Pixels whose
/// source location falls outside the source image or behind the source camera
/// are masked out and set to zero.
pub fn warp_frame(
    src_img: &Grid<Rgb>,
    src_cam: &CameraPose,
    dst_cam: &CameraPose,
    dst_depth: &Grid<f64>,
) -> WarpedImage {
    let hits = source_hits(dst_cam, dst_depth, src_cam);
    warp_with_hits(src_img, &hits)
}

pub fn warp_with_hits(src_img: &Grid<Rgb>, hits: &Grid<Option<SourceHit>>) -> WarpedImage {
    let (w, h) = hits.dims();
    let samples = Grid::par_from_fn(w, h, |x, y| {
        hits.get(x, y)
            .and_then(|hit| src_img.sample_bilinear(hit.pixel.u, hit.pixel.v))
    });
    WarpedImage {
        image: samples.map(|s| s.unwrap_or_else(Rgb::zeros)),
        valid: samples.map(|s| s.is_some()),
    }
}

/// Previous output frame reprojected into the current view.
#[derive(Debug, Clone, PartialEq)]
pub struct Reprojection {
    pub color: Grid<Rgb>,
    /// Depth of the previous surface point measured in the current camera.
    pub depth: Grid<f64>,
    pub valid: Grid<bool>,
}

/// Looks up the previous frame's color and depth through the current depth
/// estimate. The looked-up depth is re-expressed in the current camera frame so
/// it is directly comparable with the current depth.
pub fn reproject_previous(
    prev_color: &Grid<Rgb>,
    prev_depth: &Grid<f64>,
    prev_cam: &CameraPose,
    cur_cam: &CameraPose,
    cur_depth: &Grid<f64>,
) -> Reprojection {
    let hits = source_hits(cur_cam, cur_depth, prev_cam);
    let (w, h) = cur_depth.dims();
    let samples = Grid::par_from_fn(w, h, |x, y| {
        let hit = (*hits.get(x, y))?;
        let color = prev_color.sample_bilinear(hit.pixel.u, hit.pixel.v)?;
        let d_prev = prev_depth.sample_bilinear(hit.pixel.u, hit.pixel.v)?;
        if !(d_prev > 0.0) {
            return None;
        }
        let world = prev_cam.unproject(DepthSample {
            pixel: hit.pixel,
            depth: d_prev,
        });
        let d_cur = cur_cam.world_to_camera(&world).z;
        (d_cur > 0.0).then_some((color, d_cur))
    });
    Reprojection {
        color: samples.map(|s| s.map_or_else(Rgb::zeros, |v| v.0)),
        depth: samples.map(|s| s.map_or(0.0, |v| v.1)),
        valid: samples.map(|s| s.is_some()),
    }
}
