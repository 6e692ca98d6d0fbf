//! Image pyramids for the coarse-to-fine solve.
//!
//! Level `k` has dimensions `⌈w/2^k⌉ × ⌈h/2^k⌉`. Coarse pixel `i` covers fine
//! pixels `2i` and `2i+1`, so with pixel centers on integers the coordinate
//! maps are `u_coarse = (u_fine - 0.5) / 2` and `u_fine = 2 u_coarse + 0.5`.

use std::ops::{Add, Mul};

use thiserror::Error;

use crate::grid::{Grid, Rgb};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PyramidError {
    #[error("grid {width}x{height} too small for {levels} pyramid levels (coarsest would be {coarse_w}x{coarse_h}, minimum {min_side}x{min_side})")]
    GridTooSmall {
        width: usize,
        height: usize,
        levels: usize,
        coarse_w: usize,
        coarse_h: usize,
        min_side: usize,
    },
    #[error("pyramid needs at least one level")]
    NoLevels,
}

/// Values that can be box-averaged.
pub trait Blend: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Blend for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Blend for Rgb {
    fn zero() -> Self {
        Rgb::zeros()
    }
}

pub fn level_dims(width: usize, height: usize, level: usize) -> (usize, usize) {
    let f = 1usize << level;
    (width.div_ceil(f), height.div_ceil(f))
}

/// Fails with `GridTooSmall` when the coarsest of `levels` levels would fall
/// below `min_side` in either dimension.
pub fn check_levels(
    width: usize,
    height: usize,
    levels: usize,
    min_side: usize,
) -> Result<(), PyramidError> {
    if levels == 0 {
        return Err(PyramidError::NoLevels);
    }
    let (cw, ch) = level_dims(width, height, levels - 1);
    if width == 0 || height == 0 || cw < min_side || ch < min_side {
        return Err(PyramidError::GridTooSmall {
            width,
            height,
            levels,
            coarse_w: cw,
            coarse_h: ch,
            min_side,
        });
    }
    Ok(())
}

/// 2×2 box average. Odd trailing rows/columns average only the pixels present.
pub fn downsample<T: Blend>(g: &Grid<T>) -> Grid<T> {
    let (w, h) = g.dims();
    let (cw, ch) = level_dims(w, h, 1);
    Grid::par_from_fn(cw, ch, |cx, cy| {
        let mut acc = T::zero();
        let mut n = 0.0;
        for y in (2 * cy)..(2 * cy + 2).min(h) {
            for x in (2 * cx)..(2 * cx + 2).min(w) {
                acc = acc + *g.get(x, y);
                n += 1.0;
            }
        }
        acc * (1.0 / n)
    })
}

/// Occupancy-weighted 2×2 average: a coarse pixel is occupied iff any of its
/// children is, and carries the mean of the occupied children.
pub fn downsample_sparse<T: Blend>(
    values: &Grid<T>,
    occupied: &Grid<bool>,
) -> (Grid<T>, Grid<bool>) {
    let (w, h) = values.dims();
    let (cw, ch) = level_dims(w, h, 1);
    let cells = Grid::par_from_fn(cw, ch, |cx, cy| {
        let mut acc = T::zero();
        let mut n = 0.0;
        for y in (2 * cy)..(2 * cy + 2).min(h) {
            for x in (2 * cx)..(2 * cx + 2).min(w) {
                if *occupied.get(x, y) {
                    acc = acc + *values.get(x, y);
                    n += 1.0;
                }
            }
        }
        if n > 0.0 {
            (acc * (1.0 / n), true)
        } else {
            (T::zero(), false)
        }
    });
    (cells.map(|c| c.0), cells.map(|c| c.1))
}

/// Dense pyramid, finest first.
pub fn build_pyramid<T: Blend>(g: &Grid<T>, levels: usize) -> Result<Vec<Grid<T>>, PyramidError> {
    check_levels(g.width(), g.height(), levels, 1)?;
    let mut out = Vec::with_capacity(levels);
    out.push(g.clone());
    for _ in 1..levels {
        let next = downsample(out.last().expect("non-empty"));
        out.push(next);
    }
    Ok(out)
}

/// One level of a sparse pyramid: values and their occupancy mask.
pub type SparseLevel<T> = (Grid<T>, Grid<bool>);

/// Occupancy-weighted pyramid of a sparse grid, finest first.
pub fn build_sparse_pyramid<T: Blend>(
    values: &Grid<T>,
    occupied: &Grid<bool>,
    levels: usize,
) -> Result<Vec<SparseLevel<T>>, PyramidError> {
    check_levels(values.width(), values.height(), levels, 1)?;
    let mut out = Vec::with_capacity(levels);
    out.push((values.clone(), occupied.clone()));
    for _ in 1..levels {
        let (v, o) = out.last().expect("non-empty");
        let next = downsample_sparse(v, o);
        out.push(next);
    }
    Ok(out)
}

/// Bilinear upsampling of a coarse grid onto a finer `width × height` domain.
pub fn upsample<T: Blend>(coarse: &Grid<T>, width: usize, height: usize) -> Grid<T> {
    let (cw, ch) = coarse.dims();
    let max_u = cw.saturating_sub(1) as f64;
    let max_v = ch.saturating_sub(1) as f64;
    Grid::par_from_fn(width, height, |x, y| {
        let u = ((x as f64 - 0.5) * 0.5).clamp(0.0, max_u);
        let v = ((y as f64 - 0.5) * 0.5).clamp(0.0, max_v);
        let x0 = (u.floor() as usize).min(cw.saturating_sub(2));
        let y0 = (v.floor() as usize).min(ch.saturating_sub(2));
        let x1 = (x0 + 1).min(cw - 1);
        let y1 = (y0 + 1).min(ch - 1);
        let fx = if cw > 1 { u - x0 as f64 } else { 0.0 };
        let fy = if ch > 1 { v - y0 as f64 } else { 0.0 };
        let top = *coarse.get(x0, y0) * (1.0 - fx) + *coarse.get(x1, y0) * fx;
        let bottom = *coarse.get(x0, y1) * (1.0 - fx) + *coarse.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}
