use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cloud::TimestepPointCloud;
use crate::geometry::{CameraPose, ViewTag};
use crate::grid::{Grid, Rgb};
use crate::params::SolverParams;

use super::{
    io_err, load_cameras, load_cloud, load_depth, load_image, save_cameras, save_cloud, save_depth,
    save_image, DatasetError,
};

/// One input camera stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewStream {
    pub frames: Vec<Grid<Rgb>>,
    pub poses: Vec<CameraPose>,
}

/// All input frames `I_{s,t}` with their poses.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub views: Vec<ViewStream>,
    pub width: usize,
    pub height: usize,
}

impl FrameSet {
    /// Checks shared resolution, pose/frame counts, `S ≥ 2` and `T ≥ 1`.
    pub fn new(views: Vec<ViewStream>) -> Result<Self, DatasetError> {
        if views.len() < 2 {
            return Err(DatasetError::TooFew {
                what: "views",
                min: 2,
                found: views.len(),
            });
        }
        let t = views[0].frames.len();
        if t == 0 {
            return Err(DatasetError::TooFew {
                what: "frames",
                min: 1,
                found: 0,
            });
        }
        let (width, height) = views[0].frames[0].dims();
        for (s, v) in views.iter().enumerate() {
            if v.poses.len() != v.frames.len() || v.frames.len() != t {
                return Err(DatasetError::PoseCountMismatch {
                    view: s,
                    frames: v.frames.len(),
                    poses: v.poses.len(),
                });
            }
            for (i, f) in v.frames.iter().enumerate() {
                if f.dims() != (width, height) {
                    return Err(DatasetError::ResolutionMismatch {
                        path: PathBuf::from(format!("view {s} frame {i}")),
                        expected: (width, height),
                        found: f.dims(),
                    });
                }
            }
        }
        Ok(Self {
            views,
            width,
            height,
        })
    }

    pub fn num_views(&self) -> usize {
        self.views.len()
    }

    pub fn num_frames(&self) -> usize {
        self.views[0].frames.len()
    }

    pub fn poses_at(&self, t: usize) -> Vec<CameraPose> {
        self.views.iter().map(|v| v.poses[t].clone()).collect()
    }
}

/// Poses of the virtual camera, one per rendered frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPath {
    pub poses: Vec<CameraPose>,
}

impl CameraPath {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Output of one rendered time step.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFrame {
    pub color: Grid<Rgb>,
    pub depth: Grid<f64>,
    pub time_index: usize,
}

pub fn view_dir(root: &Path, s: usize) -> PathBuf {
    root.join("views").join(format!("view_{s:02}"))
}

pub fn frame_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(format!("frame_{t:05}.png"))
}

pub fn cloud_path(root: &Path, t: usize) -> PathBuf {
    root.join("clouds").join(format!("cloud_{t:05}.ply"))
}

fn count_frames(dir: &Path) -> Result<usize, DatasetError> {
    let entries = fs::read_dir(dir).map_err(io_err(dir))?;
    let mut indices = Vec::new();
    for e in entries {
        let e = e.map_err(io_err(dir))?;
        let name = e.file_name().to_string_lossy().into_owned();
        let Some(stem) = name.strip_prefix("frame_") else {
            continue;
        };
        let Some(num) = stem
            .strip_suffix(".png")
            .or_else(|| stem.strip_suffix(".ppm"))
        else {
            continue;
        };
        if let Ok(t) = num.parse::<usize>() {
            indices.push(t);
        }
    }
    indices.sort_unstable();
    indices.dedup();
    for (i, &t) in indices.iter().enumerate() {
        if t != i {
            return Err(DatasetError::MissingFile(frame_path(dir, i)));
        }
    }
    Ok(indices.len())
}

fn frame_file(dir: &Path, t: usize) -> PathBuf {
    let png = frame_path(dir, t);
    if png.exists() {
        png
    } else {
        dir.join(format!("frame_{t:05}.ppm"))
    }
}

/// Loads and validates `root/views/*` and `root/clouds/*`.
pub fn load_dataset(root: &Path) -> Result<(FrameSet, Vec<TimestepPointCloud>), DatasetError> {
    let views_root = root.join("views");
    let mut num_views = 0;
    while view_dir(root, num_views).is_dir() {
        num_views += 1;
    }
    if num_views == 0 {
        return Err(DatasetError::MissingFile(view_dir(root, 0)));
    }
    if !views_root.is_dir() {
        return Err(DatasetError::MissingFile(views_root));
    }
    let views: Vec<ViewStream> = (0..num_views)
        .into_par_iter()
        .map(|s| load_view(root, s))
        .collect::<Result<_, _>>()?;
    let expected_frames = views[0].frames.len();
    for (s, v) in views.iter().enumerate() {
        if v.frames.len() != expected_frames {
            return Err(DatasetError::Malformed {
                path: view_dir(root, s),
                reason: format!("{} frames, view 0 has {expected_frames}", v.frames.len()),
            });
        }
    }
    // name the offending file on resolution mismatches
    let dims = views[0].frames.first().map(Grid::dims);
    for (s, v) in views.iter().enumerate() {
        for (t, f) in v.frames.iter().enumerate() {
            if Some(f.dims()) != dims {
                return Err(DatasetError::ResolutionMismatch {
                    path: frame_file(&view_dir(root, s), t),
                    expected: dims.unwrap_or_default(),
                    found: f.dims(),
                });
            }
        }
    }
    let frames = FrameSet::new(views)?;
    let clouds = (0..frames.num_frames())
        .into_par_iter()
        .map(|t| load_cloud(&cloud_path(root, t), t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((frames, clouds))
}

fn load_view(root: &Path, s: usize) -> Result<ViewStream, DatasetError> {
    let dir = view_dir(root, s);
    let t = count_frames(&dir)?;
    let cam_path = dir.join("cameras.json");
    let poses = if cam_path.exists() {
        load_cameras(&cam_path, ViewTag::Input(s))?
    } else {
        Vec::new()
    };
    if poses.len() != t {
        return Err(DatasetError::PoseCountMismatch {
            view: s,
            frames: t,
            poses: poses.len(),
        });
    }
    let frames = (0..t)
        .map(|i| load_image(&frame_file(&dir, i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ViewStream { frames, poses })
}

fn ensure_dir(dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|source| DatasetError::IoFailure {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes frames, poses and clouds in the layout [`load_dataset`] reads.
pub fn save_dataset(
    root: &Path,
    frames: &FrameSet,
    clouds: &[TimestepPointCloud],
) -> Result<(), DatasetError> {
    for (s, view) in frames.views.iter().enumerate() {
        let dir = view_dir(root, s);
        ensure_dir(&dir)?;
        save_cameras(&view.poses, &dir.join("cameras.json"))?;
        for (t, f) in view.frames.iter().enumerate() {
            save_image(f, &frame_path(&dir, t))?;
        }
    }
    ensure_dir(&root.join("clouds"))?;
    for (t, c) in clouds.iter().enumerate() {
        save_cloud(c, &cloud_path(root, t))?;
    }
    Ok(())
}

pub fn load_camera_path(path: &Path) -> Result<CameraPath, DatasetError> {
    Ok(CameraPath {
        poses: load_cameras(path, ViewTag::Virtual)?,
    })
}

pub fn save_camera_path(path_poses: &CameraPath, file: &Path) -> Result<(), DatasetError> {
    if let Some(dir) = file.parent() {
        ensure_dir(dir)?;
    }
    save_cameras(&path_poses.poses, file)
}

pub fn load_params(path: &Path) -> Result<SolverParams, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let params: SolverParams =
        serde_json::from_str(&text).map_err(|e| DatasetError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    params.validate().map_err(|e| DatasetError::Malformed {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(params)
}

pub fn save_params(params: &SolverParams, path: &Path) -> Result<(), DatasetError> {
    let text = serde_json::to_string_pretty(params).expect("params serialize");
    fs::write(path, text).map_err(io_err(path))
}

/// Writes `frame_%05d.png` and `depth_%05d.pfm` into `dir`.
pub fn save_frame(frame: &RenderedFrame, dir: &Path) -> Result<(), DatasetError> {
    ensure_dir(dir)?;
    save_image(&frame.color, &frame_path(dir, frame.time_index))?;
    save_depth(
        &frame.depth,
        &dir.join(format!("depth_{:05}.pfm", frame.time_index)),
    )
}

/// Reads back a directory written by [`save_frame`], frames `0..` until the
/// first missing index.
pub fn load_frames(dir: &Path) -> Result<Vec<RenderedFrame>, DatasetError> {
    let mut out = Vec::new();
    loop {
        let t = out.len();
        let img = frame_path(dir, t);
        if !img.exists() {
            break;
        }
        out.push(RenderedFrame {
            color: load_image(&img)?,
            depth: load_depth(&dir.join(format!("depth_{t:05}.pfm")))?,
            time_index: t,
        });
    }
    Ok(out)
}
