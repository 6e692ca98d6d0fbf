//! 8-bit PNG/PPM color images. File values map linearly onto [0, 1].

use std::path::Path;

use image::{GrayImage, ImageReader, Luma, Rgb as PixelRgb, RgbImage};

use crate::grid::{Grid, Rgb};

use super::{io_err, DatasetError};

fn to_u8(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn image_err(path: &Path, err: image::ImageError) -> DatasetError {
    match err {
        image::ImageError::IoError(e) => io_err(path)(e),
        other => DatasetError::Malformed {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Writes PNG or PPM depending on the extension. Values are clamped to [0, 1].
pub fn save_image(img: &Grid<Rgb>, path: &Path) -> Result<(), DatasetError> {
    let (w, h) = img.dims();
    let mut buf = RgbImage::new(w as u32, h as u32);
    for (x, y, px) in buf.enumerate_pixels_mut() {
        let c = img.get(x as usize, y as usize);
        *px = PixelRgb([to_u8(c.x), to_u8(c.y), to_u8(c.z)]);
    }
    buf.save(path).map_err(|e| image_err(path, e))
}

pub fn load_image(path: &Path) -> Result<Grid<Rgb>, DatasetError> {
    let img = ImageReader::open(path)
        .map_err(io_err(path))?
        .with_guessed_format()
        .map_err(io_err(path))?
        .decode()
        .map_err(|e| image_err(path, e))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(Grid::from_fn(w, h, |x, y| {
        let p = img.get_pixel(x as u32, y as u32).0;
        Rgb::new(p[0] as f64, p[1] as f64, p[2] as f64) / 255.0
    }))
}

pub fn save_mask(mask: &Grid<bool>, path: &Path) -> Result<(), DatasetError> {
    let (w, h) = mask.dims();
    let buf = GrayImage::from_fn(w as u32, h as u32, |x, y| {
        Luma([if *mask.get(x as usize, y as usize) {
            255
        } else {
            0
        }])
    });
    buf.save(path).map_err(|e| image_err(path, e))
}

pub fn load_mask(path: &Path) -> Result<Grid<bool>, DatasetError> {
    let img = ImageReader::open(path)
        .map_err(io_err(path))?
        .decode()
        .map_err(|e| image_err(path, e))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(Grid::from_fn(w, h, |x, y| {
        img.get_pixel(x as u32, y as u32).0[0] >= 128
    }))
}
