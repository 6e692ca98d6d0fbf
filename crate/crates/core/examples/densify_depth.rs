//! Densifies one frame's sparse depth three ways — nearest occupied sample,
//! unweighted harmonic infill, and the weighted multiscale diffusion — and
//! compares each against the true depth.
//!
//! ```text
//! cargo run --release --example densify_depth
//! ```

use nvs_diffusion::diffusion::{harmonic_infill, multiscale_solve};
use nvs_diffusion::geometry::splat_points;
use nvs_diffusion::pipeline::{
    depth_rmse, frame_inputs, generate_synthetic, nearest_sample_depth, SyntheticSpec,
};
use nvs_diffusion::Ablation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec::default();
    let data = generate_synthetic(&spec, 7)?;
    let t = 0;
    let gt = &data.ground_truth[t];
    let cam = &data.path.poses[t];

    let sparse = splat_points(&data.clouds[t], cam, spec.width, spec.height);
    let nearest = nearest_sample_depth(&sparse).ok_or("no sample projects into the view")?;
    let (infill, stats) = harmonic_infill(&sparse.depth, &sparse.occupied, &spec.solver)?;

    let (inputs, ranking) = frame_inputs(
        &data.frames,
        &data.clouds,
        &data.path,
        t,
        &spec.solver,
        None,
    );
    let solution = multiscale_solve(&inputs, &spec.solver, &Ablation::default())?;

    println!("views used: {:?}", ranking.selected);
    println!("depth RMSE");
    println!(
        "  nearest sample   {:.4}",
        depth_rmse(&nearest, &gt.depth).unwrap_or(f64::NAN)
    );
    println!(
        "  harmonic infill  {:.4}  ({} CG iterations)",
        depth_rmse(&infill, &gt.depth).unwrap_or(f64::NAN),
        stats.iterations
    );
    println!(
        "  diffusion        {:.4}",
        depth_rmse(&solution.depth, &gt.depth).unwrap_or(f64::NAN)
    );
    for level in &solution.levels {
        println!(
            "  level {} ({}x{}): energy {:.4e} → {:.4e}, {} CG iterations",
            level.level,
            level.width,
            level.height,
            level.initial_energy,
            level.final_energy,
            level.iterations()
        );
    }
    Ok(())
}
