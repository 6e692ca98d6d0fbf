use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nvs_diffusion::geometry::ViewTag;
use nvs_diffusion::io::{
    load_camera_path, load_cameras, load_dataset, load_frames, load_mask, load_params,
    save_cameras, CameraPath, RenderedFrame,
};
use nvs_diffusion::pipeline::{
    ablate, compute_metrics, generate_synthetic, parse_toggles, render_sequence, with_threads,
    write_ablation_csv, write_metrics_csv, write_outputs, SyntheticSpec,
};
use nvs_diffusion::pose_smoothing::{smooth_trajectory, TrajectoryProblem};
use nvs_diffusion::{Ablation, SolverParams};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "nvs",
    version,
    about = "Novel-view depth and color diffusion from sparse point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a virtual camera path through a dataset.
    Render(RenderArgs),
    /// Generate the synthetic moving-box dataset with ground truth.
    Synth {
        /// JSON scene spec; omitted fields take their defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the full method and each toggle, writing a comparison table.
    Ablate {
        /// Dataset with `path/cameras.json`; `gt/` and `config.json` are used if present.
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated: no_temporal, no_pc_weights, no_depth_weights,
        /// no_image_grads, no_proj_weights.
        #[arg(long, default_value = "")]
        toggles: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
    /// Smooth a camera trajectory (cameras.json layout).
    SmoothPath {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Gaussian width of the smoothing window, in frames.
        #[arg(long, default_value_t = SolverParams::default().smoothing_window_sigma)]
        sigma: f64,
        /// Keyframe anchor spacing.
        #[arg(long, default_value_t = SolverParams::default().kappa)]
        kappa: usize,
        #[arg(long, default_value_t = SolverParams::default().smoothing_data_weight)]
        data_weight: f64,
    },
    /// Compare rendered frames against ground truth.
    Metrics {
        #[arg(long)]
        rendered: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Threads {
    /// Worker threads; `NVS_THREADS` takes precedence. Defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl Threads {
    fn resolve(&self) -> Result<usize> {
        let n = match std::env::var("NVS_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("NVS_THREADS: expected a thread count, got `{v}`"))?,
            Err(_) => self.threads.unwrap_or_else(rayon::current_num_threads),
        };
        if n == 0 {
            return Err("thread count must be at least 1".into());
        }
        Ok(n)
    }
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Virtual camera path (cameras.json layout).
    #[arg(long)]
    path: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Solver config JSON (default: the dataset's `config.json` if present); command-line values override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda_pc: Option<f64>,
    #[arg(long)]
    lambda_t: Option<f64>,
    #[arg(long)]
    lambda_p: Option<f64>,
    #[arg(long)]
    lambda_g: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    views: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[command(flatten)]
    threads: Threads,
}

impl RenderArgs {
    fn params(&self) -> Result<SolverParams> {
        let dataset_config = self.dataset.join("config.json");
        let mut p = match &self.config {
            Some(file) => load_params(file)?,
            None if dataset_config.is_file() => load_params(&dataset_config)?,
            None => SolverParams::default(),
        };
        let overrides = [
            (&mut p.lambda_pc, self.lambda_pc),
            (&mut p.lambda_t, self.lambda_t),
            (&mut p.lambda_p, self.lambda_p),
            (&mut p.lambda_g, self.lambda_g),
            (&mut p.sigma, self.sigma),
        ];
        for (field, value) in overrides {
            if let Some(v) = value {
                *field = v;
            }
        }
        if let Some(v) = self.views {
            p.views = v;
        }
        if let Some(v) = self.levels {
            p.pyramid_levels = v;
        }
        p.validate()?;
        Ok(p)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Render(args) => render(&args),
        Command::Synth { spec, seed, out } => synth(spec.as_deref(), seed, &out),
        Command::Ablate {
            dataset,
            toggles,
            out,
            threads,
        } => run_ablation(&dataset, &toggles, &out, &threads),
        Command::SmoothPath {
            input,
            out,
            sigma,
            kappa,
            data_weight,
        } => smooth_path(&input, &out, sigma, kappa, data_weight),
        Command::Metrics { rendered, gt, out } => metrics(&rendered, &gt, &out),
    }
}

/// Ground truth under `dir/gt`, truncated to the path length, if present.
fn optional_ground_truth(dir: &Path, frames: usize) -> Result<Option<Vec<RenderedFrame>>> {
    let gt_dir = dir.join("gt");
    if !gt_dir.is_dir() {
        return Ok(None);
    }
    let mut gt = load_frames(&gt_dir)?;
    if gt.len() < frames {
        return Err(format!(
            "{}: {} ground-truth frames for a {frames}-frame path",
            gt_dir.display(),
            gt.len()
        )
        .into());
    }
    gt.truncate(frames);
    Ok(Some(gt))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()).into())
}

fn render(args: &RenderArgs) -> Result<()> {
    let params = args.params()?;
    let threads = args.threads.resolve()?;
    let (frames, clouds) = load_dataset(&args.dataset)?;
    let path = load_camera_path(&args.path)?;
    let gt = optional_ground_truth(&args.dataset, path.len())?;
    create_dir(&args.out)?;
    let outputs = with_threads(threads, || {
        render_sequence(&frames, &clouds, &path, &params, &Ablation::default())
    })??;
    let rows = write_outputs(&outputs, gt.as_deref(), &args.out)?;
    log::info!("wrote {} frames to {}", rows.len(), args.out.display());
    Ok(())
}

fn synth(spec_file: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let spec: SyntheticSpec = match spec_file {
        Some(file) => {
            let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", file.display()))?
        }
        None => SyntheticSpec::default(),
    };
    let data = generate_synthetic(&spec, seed)?;
    create_dir(out)?;
    data.save(out)?;
    log::info!(
        "wrote {} views x {} frames to {}",
        spec.views,
        spec.frames,
        out.display()
    );
    Ok(())
}

fn run_ablation(dataset: &Path, toggles: &str, out: &Path, threads: &Threads) -> Result<()> {
    let toggles = parse_toggles(toggles)?;
    let threads = threads.resolve()?;
    let config = dataset.join("config.json");
    let params = if config.exists() {
        load_params(&config)?
    } else {
        SolverParams::default()
    };
    let (frames, clouds) = load_dataset(dataset)?;
    let path = load_camera_path(&dataset.join("path").join("cameras.json"))?;
    let gt = optional_ground_truth(dataset, path.len())?;
    let rows = with_threads(threads, || {
        ablate(&frames, &clouds, &path, &params, &toggles, gt.as_deref())
    })??;
    create_dir(out)?;
    let table = out.join("ablation.csv");
    write_ablation_csv(&rows, &table)?;
    for r in &rows {
        println!(
            "{:18} psnr {:>8} rmse {:>9} temporal {:>9}",
            r.config,
            fmt_opt(r.mean_psnr_db, 3),
            fmt_opt(r.mean_depth_rmse, 5),
            fmt_opt(r.mean_temporal_delta, 5)
        );
    }
    log::info!("wrote {}", table.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

fn smooth_path(input: &Path, out: &Path, sigma: f64, kappa: usize, data_weight: f64) -> Result<()> {
    let observed = load_cameras(input, ViewTag::Virtual)?;
    let problem = TrajectoryProblem::with_keyframes(observed, kappa, sigma, data_weight);
    let smoothed = smooth_trajectory(&problem)?;
    let path = CameraPath { poses: smoothed };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    save_cameras(&path.poses, out)?;
    log::info!("smoothed {} poses into {}", path.len(), out.display());
    Ok(())
}

fn metrics(rendered_dir: &Path, gt_dir: &Path, out: &Path) -> Result<()> {
    let rendered = load_frames(rendered_dir)?;
    if rendered.is_empty() {
        return Err(format!("{}: no rendered frames", rendered_dir.display()).into());
    }
    let gt = load_frames(gt_dir)?;
    let coverage_files: Vec<PathBuf> = (0..rendered.len())
        .map(|t| rendered_dir.join(format!("coverage_{t:05}.png")))
        .collect();
    let coverage = if coverage_files.iter().all(|p| p.exists()) {
        Some(
            coverage_files
                .iter()
                .map(|p| load_mask(p))
                .collect::<std::result::Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let rows = compute_metrics(&rendered, Some(&gt), coverage.as_deref())?;
    write_metrics_csv(&rows, out)?;
    log::info!("wrote {} metric rows to {}", rows.len(), out.display());
    Ok(())
}
