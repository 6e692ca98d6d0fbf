//! Projects ground-truth surface points into an input camera and back, then
//! backward-warps that input frame into the virtual view through the true
//! depth map and reports how closely the warp reproduces the true image.
//!
//! ```text
//! cargo run --release --example project_and_warp [out_dir]
//! ```

use std::path::PathBuf;

use nvs_diffusion::geometry::{warp_frame, DepthSample, Pixel};
use nvs_diffusion::io::save_image;
use nvs_diffusion::pipeline::{psnr, single_view_estimate, SyntheticScene, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map_or_else(
        || std::env::temp_dir().join("project_and_warp"),
        PathBuf::from,
    );
    std::fs::create_dir_all(&out)?;

    let scene = SyntheticScene::new(SyntheticSpec::default());
    let (w, h) = (scene.spec.width, scene.spec.height);
    let virtual_cam = scene.virtual_camera(0);
    let input_cam = scene.input_camera(2, 0);
    let (gt_color, gt_depth) = scene.render(&virtual_cam, 0);
    let (input_color, _) = scene.render(&input_cam, 0);

    // Round trip: every virtual pixel → world point → input camera → world point.
    let mut worst = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let d = *gt_depth.get(x, y);
            let p = virtual_cam.unproject(DepthSample {
                pixel: Pixel::new(x as f64, y as f64),
                depth: d,
            });
            if let Some((pixel, depth)) = input_cam.project(&p).visible() {
                let back = input_cam.unproject(DepthSample { pixel, depth });
                worst = worst.max((back - p).norm());
            }
        }
    }
    println!("max project/unproject round-trip error: {worst:.3e}");

    let warped = warp_frame(&input_color, &input_cam, &virtual_cam, &gt_depth);
    println!(
        "warped pixels with a valid source sample: {} of {}",
        warped.valid_count(),
        w * h
    );
    let filled = single_view_estimate(&input_color, &input_cam, &virtual_cam, &gt_depth);
    println!(
        "PSNR of the hole-filled warp vs the true view: {:.2} dB",
        psnr(&filled, &gt_color)
    );

    save_image(&gt_color, &out.join("virtual_truth.png"))?;
    save_image(&input_color, &out.join("input_view.png"))?;
    save_image(&warped.image, &out.join("warped.png"))?;
    println!("images written to {}", out.display());
    Ok(())
}
