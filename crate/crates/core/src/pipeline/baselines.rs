//! Simple reference methods the diffusion result is compared against.

use crate::geometry::{warp_frame, CameraPose, SparseMaps};
use crate::grid::{Grid, Rgb};

use super::metrics::psnr;

/// Every pixel takes the value of the nearest pixel where `mask` is set
/// (Euclidean pixel distance; ties go to the lower row-major index).
/// Returns `None` when the mask is empty.
pub fn nearest_fill<T: Copy + Send + Sync>(values: &Grid<T>, mask: &Grid<bool>) -> Option<Grid<T>> {
    let (w, h) = values.dims();
    if !mask.as_slice().iter().any(|&m| m) {
        return None;
    }
    Some(Grid::par_from_fn(w, h, |x, y| {
        if *mask.get(x, y) {
            return *values.get(x, y);
        }
        let mut best: Option<(usize, usize)> = None; // (dist², index)
        let max_r = w.max(h);
        for r in 1..=max_r {
            if let Some((d, _)) = best {
                if r * r > d {
                    break;
                }
            }
            let (x0, x1) = (x as isize - r as isize, x as isize + r as isize);
            let (y0, y1) = (y as isize - r as isize, y as isize + r as isize);
            for yy in y0..=y1 {
                if yy < 0 || yy >= h as isize {
                    continue;
                }
                let on_edge_row = yy == y0 || yy == y1;
                let xs: Box<dyn Iterator<Item = isize>> = if on_edge_row {
                    Box::new(x0..=x1)
                } else {
                    Box::new([x0, x1].into_iter())
                };
                for xx in xs {
                    if xx < 0 || xx >= w as isize {
                        continue;
                    }
                    let (xu, yu) = (xx as usize, yy as usize);
                    if !*mask.get(xu, yu) {
                        continue;
                    }
                    let d = xu.abs_diff(x).pow(2) + yu.abs_diff(y).pow(2);
                    let idx = yu * w + xu;
                    if best.is_none_or(|b| (d, idx) < b) {
                        best = Some((d, idx));
                    }
                }
            }
        }
        let (_, idx) = best.expect("mask is non-empty");
        values.as_slice()[idx]
    }))
}

/// Densifies sparse depth by copying the nearest occupied sample.
pub fn nearest_sample_depth(sparse: &SparseMaps) -> Option<Grid<f64>> {
    nearest_fill(&sparse.depth, &sparse.occupied)
}

/// Warps one input view through `depth` and fills its holes from the nearest
/// valid pixel.
pub fn single_view_estimate(
    image: &Grid<Rgb>,
    src_cam: &CameraPose,
    dst_cam: &CameraPose,
    depth: &Grid<f64>,
) -> Grid<Rgb> {
    let warped = warp_frame(image, src_cam, dst_cam, depth);
    nearest_fill(&warped.image, &warped.valid)
        .unwrap_or_else(|| Grid::filled(depth.width(), depth.height(), Rgb::zeros()))
}

/// Highest PSNR against `ground_truth` over single warped views.
pub fn best_single_view_psnr(
    sources: &[(Grid<Rgb>, CameraPose)],
    dst_cam: &CameraPose,
    depth: &Grid<f64>,
    ground_truth: &Grid<Rgb>,
) -> Option<f64> {
    sources
        .iter()
        .map(|(img, cam)| {
            psnr(
                &single_view_estimate(img, cam, dst_cam, depth),
                ground_truth,
            )
        })
        .max_by(f64::total_cmp)
}
