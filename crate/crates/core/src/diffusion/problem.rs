use crate::geometry::{
    reproject_previous, source_hits, splat_points, visibility_from_hits, warp_with_hits,
    CameraPose, Reprojection, SparseMaps, WarpedImage,
};
use crate::grid::{Grid, Rgb};

/// An input frame at one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceView {
    pub image: Grid<Rgb>,
    pub camera: CameraPose,
}

/// The previous output frame at one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct PreviousFrame {
    pub color: Grid<Rgb>,
    pub depth: Grid<f64>,
    pub camera: CameraPose,
}

/// Everything a single-level solve needs, independent of the current depth.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelInputs {
    pub camera: CameraPose,
    pub sparse: SparseMaps,
    pub sources: Vec<SourceView>,
    pub previous: Option<PreviousFrame>,
}

impl LevelInputs {
    pub fn dims(&self) -> (usize, usize) {
        self.sparse.depth.dims()
    }

    /// Splats `cloud` into `camera` at the given resolution.
    pub fn from_cloud(
        camera: CameraPose,
        cloud: &crate::cloud::TimestepPointCloud,
        width: usize,
        height: usize,
        sources: Vec<SourceView>,
        previous: Option<PreviousFrame>,
    ) -> Self {
        let sparse = splat_points(cloud, &camera, width, height);
        Self {
            camera,
            sparse,
            sources,
            previous,
        }
    }
}

/// Data terms of one frame, with the sources warped through a fixed depth map.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProblem {
    pub sparse: SparseMaps,
    pub warped: Vec<WarpedImage>,
    /// Visibility of each pixel from each source, already masked by warp validity.
    pub visibility: Vec<Grid<bool>>,
    /// Previous frame reprojected into the current view; `None` at `t = 0`.
    pub previous: Option<Reprojection>,
}

impl FrameProblem {
    /// Warps every source and the previous frame through `depth`.
    pub fn warp(inputs: &LevelInputs, depth: &Grid<f64>) -> Self {
        let (warped, visibility) = inputs
            .sources
            .iter()
            .map(|src| {
                let hits = source_hits(&inputs.camera, depth, &src.camera);
                let warped = warp_with_hits(&src.image, &hits);
                let vis = visibility_from_hits(&hits, src.image.width(), src.image.height());
                let vis = Grid::from_fn(vis.width(), vis.height(), |x, y| {
                    *vis.get(x, y) && *warped.valid.get(x, y)
                });
                (warped, vis)
            })
            .unzip();
        let previous = inputs.previous.as_ref().map(|prev| {
            reproject_previous(
                &prev.color,
                &prev.depth,
                &prev.camera,
                &inputs.camera,
                depth,
            )
        });
        Self {
            sparse: inputs.sparse.clone(),
            warped,
            visibility,
            previous,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.sparse.depth.dims()
    }

    /// Pixels constrained by a sparse sample or by at least one valid warp.
    pub fn coverage(&self) -> Grid<bool> {
        let (w, h) = self.dims();
        Grid::from_fn(w, h, |x, y| {
            *self.sparse.occupied.get(x, y) || self.warped.iter().any(|s| *s.valid.get(x, y))
        })
    }
}
