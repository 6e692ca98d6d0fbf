//! Adds orientation and position jitter to a circular camera trajectory,
//! smooths it with keyframe anchors, and reports the error against the clean
//! trajectory before and after.
//!
//! ```text
//! cargo run --release --example smooth_trajectory [seed]
//! ```

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use nvs_diffusion::geometry::{angle_axis_to_rotation, intrinsics};
use nvs_diffusion::pose_smoothing::{
    smooth_trajectory, smoothing_objective, trajectory_errors, TrajectoryProblem,
};
use nvs_diffusion::CameraPose;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle_noise = Normal::new(0.0, 0.02)?;
    let center_noise = Normal::new(0.0, 0.01)?;
    let k = intrinsics(200.0, 200.0, 95.5, 63.5);

    let n = 61;
    let clean: Vec<CameraPose> = (0..n)
        .map(|t| {
            let a = t as f64 / (n - 1) as f64 * std::f64::consts::FRAC_PI_2;
            let eye = Vector3::new(3.0 * a.sin(), 0.0, -3.0 * a.cos());
            CameraPose::look_at(k, eye, Vector3::zeros(), Vector3::new(0.0, 1.0, 0.0)).with_time(t)
        })
        .collect();
    let noisy: Vec<CameraPose> = clean
        .iter()
        .map(|p| {
            let mut q = p.clone();
            let jitter = Vector3::from_fn(|_, _| angle_noise.sample(&mut rng));
            q.rotation = angle_axis_to_rotation(&jitter) * p.rotation;
            q.center += Vector3::from_fn(|_, _| center_noise.sample(&mut rng));
            q
        })
        .collect();

    let problem = TrajectoryProblem::with_keyframes(noisy.clone(), 20, 1.5, 1.0);
    let smoothed = smooth_trajectory(&problem)?;
    let before = trajectory_errors(&noisy, &clean)?;
    let after = trajectory_errors(&smoothed, &clean)?;
    println!("anchors: {:?}", problem.anchors);
    println!(
        "objective: {:.5} → {:.5}",
        smoothing_objective(&problem, &noisy),
        smoothing_objective(&problem, &smoothed)
    );
    println!(
        "orientation error: {:.3}° → {:.3}°",
        before.orientation_deg, after.orientation_deg
    );
    println!(
        "position error:    {:.4} → {:.4}",
        before.position, after.position
    );
    Ok(())
}
