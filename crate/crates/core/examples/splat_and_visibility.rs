//! Splats one timestep's sparse cloud into the virtual camera with a z-buffer
//! and computes, for every input view, which virtual pixels it can see.
//!
//! ```text
//! cargo run --release --example splat_and_visibility
//! ```

use nvs_diffusion::geometry::{splat_points, visibility_maps};
use nvs_diffusion::pipeline::{
    coverage_fraction, generate_synthetic, SyntheticScene, SyntheticSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec::default();
    let data = generate_synthetic(&spec, 11)?;
    let scene = SyntheticScene::new(spec.clone());
    let t = 0;
    let virtual_cam = &data.path.poses[t];
    let (_, gt_depth) = scene.render(virtual_cam, t);

    let sparse = splat_points(&data.clouds[t], virtual_cam, spec.width, spec.height);
    let (lo, hi) = sparse.depth_range().unwrap_or((f64::NAN, f64::NAN));
    println!(
        "{} points → {} occupied pixels ({:.1}%), depth range {lo:.3}..{hi:.3}",
        data.clouds[t].len(),
        sparse.occupied_count(),
        100.0 * coverage_fraction(&sparse.occupied)
    );

    let mut abs_err: Vec<f64> = (0..sparse.depth.len())
        .filter(|&i| sparse.occupied.as_slice()[i])
        .map(|i| (sparse.depth.as_slice()[i] - gt_depth.as_slice()[i]).abs())
        .collect();
    abs_err.sort_by(f64::total_cmp);
    println!(
        "splatted depth vs truth: median |err| {:.4}, 99th percentile {:.4}",
        abs_err[abs_err.len() / 2],
        abs_err[abs_err.len() * 99 / 100]
    );

    for (s, view) in data.frames.views.iter().enumerate() {
        let vis = visibility_maps(
            virtual_cam,
            &gt_depth,
            &view.poses[t],
            spec.width,
            spec.height,
        );
        println!(
            "view {s}: sees {:.1}% of the virtual image",
            100.0 * coverage_fraction(&vis)
        );
    }
    Ok(())
}
