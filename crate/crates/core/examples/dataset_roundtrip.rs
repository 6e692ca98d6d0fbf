//! Writes a synthetic dataset to disk in the on-disk layout (PNG frames,
//! `cameras.json` poses, binary PLY clouds, PFM depths), reads it back and
//! reports the largest difference for each kind of data.
//!
//! ```text
//! cargo run --release --example dataset_roundtrip
//! ```

use nvs_diffusion::io::{load_camera_path, load_dataset, load_frames, load_params};
use nvs_diffusion::pipeline::{generate_synthetic, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        width: 96,
        height: 64,
        focal: 95.0,
        frames: 3,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec, 5)?;
    let dir = tempfile::tempdir()?;
    data.save(dir.path())?;

    let (frames, clouds) = load_dataset(dir.path())?;
    let path = load_camera_path(&dir.path().join("path").join("cameras.json"))?;
    let gt = load_frames(&dir.path().join("gt"))?;
    let params = load_params(&dir.path().join("config.json"))?;

    let mut color = 0.0f64;
    let mut pose = 0.0f64;
    for (a, b) in data.frames.views.iter().zip(&frames.views) {
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            for (pa, pb) in fa.as_slice().iter().zip(fb.as_slice()) {
                color = color.max((pa - pb).amax());
            }
        }
        for (pa, pb) in a.poses.iter().zip(&b.poses) {
            pose = pose
                .max((pa.rotation - pb.rotation).amax())
                .max((pa.center - pb.center).amax());
        }
    }
    let mut point = 0.0f64;
    for (a, b) in data.clouds.iter().zip(&clouds) {
        for (pa, pb) in a.points.iter().zip(&b.points) {
            point = point.max((pa.position - pb.position).amax());
        }
    }
    let mut depth = 0.0f64;
    for (a, b) in data.ground_truth.iter().zip(&gt) {
        for (da, db) in a.depth.as_slice().iter().zip(b.depth.as_slice()) {
            depth = depth.max((da - db).abs());
        }
    }
    println!(
        "views {} × frames {}, path {} poses",
        frames.num_views(),
        frames.num_frames(),
        path.len()
    );
    println!("max color difference (8-bit PNG): {color:.5}");
    println!("max pose difference (JSON):       {pose:.3e}");
    println!("max point difference (f32 PLY):   {point:.3e}");
    println!("max depth difference (f32 PFM):   {depth:.3e}");
    println!("solver config survives: {}", params == data.spec.solver);
    Ok(())
}
