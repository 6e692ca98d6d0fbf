//! Colored point clouds as PLY. Writes binary little-endian with
//! `float x y z` and `uchar red green blue`; reads binary little-endian or
//! ascii with any scalar property types, ignoring unknown properties.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::cloud::{ColoredPoint, TimestepPointCloud};
use crate::grid::Rgb;

use super::{io_err, DatasetError};

pub fn write_ply(cloud: &TimestepPointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(256 + 15 * cloud.len());
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\ncomment time_index {}\nelement vertex {}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        cloud.time_index,
        cloud.len()
    )
    .expect("write to vec");
    for p in &cloud.points {
        for c in p.position.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for c in p.color.iter() {
            out.push(quantize(*c));
        }
    }
    out
}

fn quantize(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn save_cloud(cloud: &TimestepPointCloud, path: &Path) -> Result<(), DatasetError> {
    fs::write(path, write_ply(cloud)).map_err(io_err(path))
}

/// Loads a cloud; `time_index` is taken from the caller since the file name
/// carries it.
pub fn load_cloud(path: &Path, time_index: usize) -> Result<TimestepPointCloud, DatasetError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let mut cloud = read_ply(&bytes, path)?;
    cloud.time_index = time_index;
    Ok(cloud)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }

    /// Divisor mapping stored color values to [0, 1].
    fn color_scale(self) -> f64 {
        match self {
            Scalar::U8 | Scalar::I8 => 255.0,
            Scalar::U16 | Scalar::I16 => 65535.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Ascii,
    BinaryLe,
}

struct Header {
    format: Format,
    vertex_count: usize,
    properties: Vec<(String, Scalar)>,
    data_offset: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header, DatasetError> {
    let bad = |reason: String| DatasetError::BadHeader {
        path: path.to_path_buf(),
        reason,
    };
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| bad("no end_header".into()))?;
    let mut data_offset = end + END.len();
    if bytes.get(data_offset) == Some(&b'\r') {
        data_offset += 1;
    }
    if bytes.get(data_offset) != Some(&b'\n') {
        return Err(bad("end_header not followed by newline".into()));
    }
    data_offset += 1;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("non-utf8 header".into()))?;
    let mut lines = text.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(bad("missing `ply` magic".into()));
    }
    let mut format = None;
    let mut vertex_count = None;
    let mut properties = Vec::new();
    let mut in_vertex = false;
    let mut seen_vertex = false;
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => format = Some(Format::Ascii),
            ["format", "binary_little_endian", _] => format = Some(Format::BinaryLe),
            ["format", other, ..] => return Err(bad(format!("unsupported format `{other}`"))),
            ["element", name, count] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    if seen_vertex {
                        return Err(bad("duplicate vertex element".into()));
                    }
                    seen_vertex = true;
                    vertex_count = Some(
                        count
                            .parse()
                            .map_err(|_| bad(format!("bad vertex count `{count}`")))?,
                    );
                } else if !seen_vertex {
                    return Err(bad(format!("element `{name}` precedes vertex")));
                }
            }
            ["property", "list", ..] if in_vertex => {
                return Err(bad("list properties on vertex are unsupported".into()))
            }
            ["property", ty, name] if in_vertex => {
                let scalar =
                    Scalar::parse(ty).ok_or_else(|| bad(format!("unknown type `{ty}`")))?;
                properties.push((name.to_string(), scalar));
            }
            ["property", ..] => {}
            _ => return Err(bad(format!("unrecognized header line `{line}`"))),
        }
    }
    Ok(Header {
        format: format.ok_or_else(|| bad("missing format line".into()))?,
        vertex_count: vertex_count.ok_or_else(|| bad("missing vertex element".into()))?,
        properties,
        data_offset,
    })
}

pub fn read_ply(bytes: &[u8], path: &Path) -> Result<TimestepPointCloud, DatasetError> {
    let header = parse_header(bytes, path)?;
    let find = |name: &str| header.properties.iter().position(|(n, _)| n == name);
    let missing = |name: &str| DatasetError::BadHeader {
        path: path.to_path_buf(),
        reason: format!("missing vertex property `{name}`"),
    };
    let xyz = [
        find("x").ok_or_else(|| missing("x"))?,
        find("y").ok_or_else(|| missing("y"))?,
        find("z").ok_or_else(|| missing("z"))?,
    ];
    let rgb = [
        find("red").ok_or_else(|| missing("red"))?,
        find("green").ok_or_else(|| missing("green"))?,
        find("blue").ok_or_else(|| missing("blue"))?,
    ];
    let malformed = |reason: String| DatasetError::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let body = &bytes[header.data_offset..];
    let n = header.vertex_count;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    match header.format {
        Format::BinaryLe => {
            let stride: usize = header.properties.iter().map(|(_, s)| s.size()).sum();
            let needed = stride
                .checked_mul(n)
                .ok_or_else(|| malformed("vertex count overflows".into()))?;
            if body.len() < needed {
                return Err(malformed(format!(
                    "expected {needed} bytes of vertex data, found {}",
                    body.len()
                )));
            }
            rows.reserve(n);
            for chunk in body[..needed].chunks_exact(stride.max(1)).take(n) {
                let mut off = 0;
                let mut row = Vec::with_capacity(header.properties.len());
                for (_, s) in &header.properties {
                    row.push(s.read_le(&chunk[off..off + s.size()]));
                    off += s.size();
                }
                rows.push(row);
            }
        }
        Format::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| malformed("non-utf8 body".into()))?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            for i in 0..n {
                let line = lines
                    .next()
                    .ok_or_else(|| malformed(format!("only {i} of {n} vertices present")))?;
                let row: Vec<f64> = line
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| malformed(format!("bad number on vertex {i}")))?;
                if row.len() < header.properties.len() {
                    return Err(malformed(format!("vertex {i} has too few values")));
                }
                rows.push(row);
            }
        }
    }
    let mut points = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let position = Vector3::new(row[xyz[0]], row[xyz[1]], row[xyz[2]]);
        if position.iter().any(|v| !v.is_finite()) {
            return Err(malformed(format!("vertex {i} has non-finite coordinates")));
        }
        let color = Rgb::from_fn(|c, _| {
            let (_, scalar) = header.properties[rgb[c]];
            (row[rgb[c]] / scalar.color_scale()).clamp(0.0, 1.0)
        });
        points.push(ColoredPoint { position, color });
    }
    Ok(TimestepPointCloud::new(0, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn p() -> PathBuf {
        PathBuf::from("mem.ply")
    }

    #[test]
    fn binary_roundtrip_within_quantization() {
        let cloud = TimestepPointCloud::new(
            3,
            vec![
                ColoredPoint {
                    position: Vector3::new(0.5, -1.25, 3.0),
                    color: Rgb::new(1.0, 0.0, 0.5),
                },
                ColoredPoint {
                    position: Vector3::new(1e3, 2.0, -7.5),
                    color: Rgb::new(0.2, 0.4, 0.6),
                },
            ],
        );
        let back = read_ply(&write_ply(&cloud), &p()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in cloud.points.iter().zip(&back.points) {
            assert_eq!(a.position, b.position);
            assert!((a.color - b.color).amax() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn ascii_with_extra_properties() {
        let src = b"ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n\
property double z\nproperty float nx\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n\
element face 0\nproperty list uchar int vertex_indices\nend_header\n1 2 3 0 255 0 0\n4 5 6 1 0 255 0\n";
        let cloud = read_ply(src, &p()).unwrap();
        assert_eq!(cloud.points[1].position, Vector3::new(4.0, 5.0, 6.0));
        assert_eq!(cloud.points[1].color, Rgb::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn corrupt_inputs_error() {
        let good = write_ply(&TimestepPointCloud::new(
            0,
            vec![ColoredPoint {
                position: Vector3::zeros(),
                color: Rgb::zeros(),
            }],
        ));
        assert!(read_ply(&good[..good.len() - 1], &p()).is_err());
        assert!(read_ply(b"ply\nformat binary_big_endian 1.0\nend_header\n", &p()).is_err());
        assert!(read_ply(b"ply\nformat ascii 1.0\nelement vertex 99999999999999999\nproperty float x\nend_header\n", &p()).is_err());
        assert!(read_ply(b"garbage", &p()).is_err());
    }
}
