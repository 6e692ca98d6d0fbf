//! Ranks the input views for a virtual camera, then compares three ways of
//! forming its color: the best single warped view, a plain average of all
//! visible warped views, and the diffused color.
//!
//! ```text
//! cargo run --release --example blend_views
//! ```

use nvs_diffusion::diffusion::{multiscale_solve, FrameProblem, LevelInputs};
use nvs_diffusion::grid::{Grid, Rgb};
use nvs_diffusion::pipeline::{
    best_single_view_psnr, frame_inputs, generate_synthetic, nearest_fill, psnr, SyntheticSpec,
};
use nvs_diffusion::Ablation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec::default();
    let data = generate_synthetic(&spec, 3)?;
    let t = 4;
    let gt = &data.ground_truth[t];
    let cam = &data.path.poses[t];

    let (inputs, ranking) = frame_inputs(
        &data.frames,
        &data.clouds,
        &data.path,
        t,
        &spec.solver,
        None,
    );
    for (s, score) in ranking.scores.iter().enumerate() {
        let mark = if ranking.selected.contains(&s) {
            "*"
        } else {
            " "
        };
        println!("{mark} view {s}: score {score:.4e}");
    }

    let solution = multiscale_solve(&inputs, &spec.solver, &Ablation::default())?;

    // Average of the visible warped views, through the solved depth.
    let level = LevelInputs {
        camera: inputs.camera.clone(),
        sparse: nvs_diffusion::geometry::splat_points(
            &inputs.cloud,
            &inputs.camera,
            spec.width,
            spec.height,
        ),
        sources: inputs.sources.clone(),
        previous: None,
    };
    let problem = FrameProblem::warp(&level, &solution.depth);
    let mut seen = Grid::filled(spec.width, spec.height, false);
    let average = Grid::from_fn(spec.width, spec.height, |x, y| {
        let (sum, n) = problem
            .warped
            .iter()
            .zip(&problem.visibility)
            .filter(|(_, vis)| *vis.get(x, y))
            .fold((Rgb::zeros(), 0usize), |(sum, n), (w, _)| {
                (sum + w.image.get(x, y), n + 1)
            });
        if n > 0 {
            seen.set(x, y, true);
            sum / n as f64
        } else {
            Rgb::zeros()
        }
    });
    let average = nearest_fill(&average, &seen).unwrap_or(average);

    let sources: Vec<_> = data
        .frames
        .views
        .iter()
        .map(|v| (v.frames[t].clone(), v.poses[t].clone()))
        .collect();
    println!("PSNR vs ground truth");
    println!(
        "  best single view   {:.2} dB",
        best_single_view_psnr(&sources, cam, &solution.depth, &gt.color).unwrap_or(f64::NAN)
    );
    println!("  visible average    {:.2} dB", psnr(&average, &gt.color));
    println!(
        "  diffused color     {:.2} dB",
        psnr(&solution.color, &gt.color)
    );
    Ok(())
}
