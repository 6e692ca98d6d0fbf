//! Single-channel PFM (`Pf`), rows stored bottom-to-top.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::grid::Grid;

use super::{io_err, DatasetError};

/// Encodes as little-endian (scale −1.0). Non-finite values are rejected.
pub fn write_pfm(depth: &Grid<f64>, path: &Path) -> Result<Vec<u8>, DatasetError> {
    if let Some(index) = depth.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(DatasetError::NonFinite {
            path: path.to_path_buf(),
            index,
        });
    }
    let (w, h) = depth.dims();
    let mut out = Vec::with_capacity(32 + 4 * w * h);
    write!(out, "Pf\n{w} {h}\n-1.0\n").expect("write to vec");
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&(*depth.get(x, y) as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn save_depth(depth: &Grid<f64>, path: &Path) -> Result<(), DatasetError> {
    let bytes = write_pfm(depth, path)?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn load_depth(path: &Path) -> Result<Grid<f64>, DatasetError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    read_pfm(&bytes, path)
}

pub fn read_pfm(bytes: &[u8], path: &Path) -> Result<Grid<f64>, DatasetError> {
    let bad = |reason: &str| DatasetError::BadHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    // magic, width, height, scale; the scale is followed by exactly one whitespace byte
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        let tok = std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?;
        tokens.push(tok.to_string());
        if tokens.len() == 1 && tok != "Pf" {
            return Err(bad("expected single-channel `Pf` magic"));
        }
    }
    if pos >= bytes.len() {
        return Err(bad("missing data"));
    }
    pos += 1;
    let w: usize = tokens[1].parse().map_err(|_| bad("invalid width"))?;
    let h: usize = tokens[2].parse().map_err(|_| bad("invalid height"))?;
    let scale: f64 = tokens[3].parse().map_err(|_| bad("invalid scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be nonzero"));
    }
    let little = scale < 0.0;
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("dimensions overflow"))?;
    let data = &bytes[pos..];
    if data.len() != expected {
        return Err(bad(&format!(
            "expected {expected} data bytes, found {}",
            data.len()
        )));
    }
    let mut grid = Grid::filled(w, h, 0.0);
    for (i, chunk) in data.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (x, row) = (i % w, i / w);
        grid.set(x, h - 1 - row, v as f64);
    }
    Ok(grid)
}
