mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;

use nvs_diffusion::diffusion::multiscale_solve;
use nvs_diffusion::geometry::splat_points;
use nvs_diffusion::io::{CameraPath, RenderedFrame};
use nvs_diffusion::pipeline::{
    ablate, compute_metrics, frame_inputs, generate_synthetic, render_sequence, with_threads,
    FrameMetrics, SyntheticScene, SyntheticSpec, PSNR_CAP_DB,
};
use nvs_diffusion::{Ablation, Grid, Rgb, SolverParams};

fn noiseless(spec: SyntheticSpec) -> SyntheticSpec {
    SyntheticSpec {
        density: 1.0,
        depth_noise: 0.0,
        outlier_fraction: 0.0,
        ..spec
    }
}

#[test]
fn noiseless_cloud_splats_onto_ground_truth_depth() {
    let spec = noiseless(common::small_spec());
    let scene = SyntheticScene::new(spec.clone());
    for t in [0, 2] {
        let cam = scene.input_camera(1, t);
        let (_, gt_depth) = scene.render(&cam, t);
        let cloud = scene.sample_cloud(std::slice::from_ref(&cam), t, 4);
        let sparse = splat_points(&cloud, &cam, spec.width, spec.height);
        for y in 0..spec.height {
            for x in 0..spec.width {
                let g = *gt_depth.get(x, y);
                assert_eq!(*sparse.occupied.get(x, y), g > 0.0);
                if g > 0.0 {
                    let d = *sparse.depth.get(x, y);
                    assert!((d - g).abs() <= 1e-9 * g, "({x},{y}) t={t}: {d} vs {g}");
                }
            }
        }
    }
}

#[test]
fn noiseless_dataset_cloud_agrees_with_the_virtual_ground_truth() {
    // All views together: every occupied virtual pixel either holds the
    // visible surface or a point hidden behind it, never one in front.
    let data = generate_synthetic(&noiseless(common::small_spec()), 9).unwrap();
    for t in 0..data.spec.frames {
        let sparse = splat_points(
            &data.clouds[t],
            &data.path.poses[t],
            data.spec.width,
            data.spec.height,
        );
        let gt = &data.ground_truth[t].depth;
        let (w, h) = gt.dims();
        let mut exact = 0;
        let mut occupied = 0;
        for y in 0..h {
            for x in 0..w {
                if !*sparse.occupied.get(x, y) {
                    continue;
                }
                occupied += 1;
                let (d, g) = (*sparse.depth.get(x, y), *gt.get(x, y));
                // A point lands within half a pixel of the center, so at a
                // silhouette it may belong to the neighbouring surface.
                let nearest = (y.saturating_sub(1)..(y + 2).min(h))
                    .flat_map(|yy| (x.saturating_sub(1)..(x + 2).min(w)).map(move |xx| (xx, yy)))
                    .map(|(xx, yy)| *gt.get(xx, yy))
                    .filter(|&v| v > 0.0)
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    d >= nearest * (1.0 - 0.02),
                    "({x},{y}) t={t}: point at {d} in front of every surface nearby ({nearest})"
                );
                if (d - g).abs() <= 0.02 * g {
                    exact += 1;
                }
            }
        }
        assert!(occupied > data.spec.width * data.spec.height / 2);
        // the rest are points hidden behind the box from the virtual view
        assert!(
            2 * exact > occupied,
            "t={t}: only {exact}/{occupied} on the visible surface"
        );
    }
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn same_seed_writes_byte_identical_datasets() {
    let spec = common::small_spec();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate_synthetic(&spec, 11)
        .unwrap()
        .save(a.path())
        .unwrap();
    generate_synthetic(&spec, 11)
        .unwrap()
        .save(b.path())
        .unwrap();
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    assert!(ta.len() > 10);
    assert_eq!(ta, tb);
    assert_ne!(
        generate_synthetic(&spec, 12).unwrap().clouds,
        generate_synthetic(&spec, 11).unwrap().clouds
    );
}

#[test]
fn sampled_depth_noise_has_the_configured_spread() {
    let sigma = 0.02;
    let spec = SyntheticSpec {
        density: 1.0,
        depth_noise: sigma,
        outlier_fraction: 0.0,
        ..SyntheticSpec::default()
    };
    let scene = SyntheticScene::new(spec);
    let cam = scene.input_camera(0, 0);
    let samples = scene.sample_points(std::slice::from_ref(&cam), 0, 21);
    assert!(samples.len() >= 10_000);
    let errors: Vec<f64> = samples
        .iter()
        .map(|s| s.sampled_depth - s.true_depth)
        .collect();
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let std = (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((std - sigma).abs() <= 0.05 * sigma, "std {std}");
    assert!(mean.abs() < 3.0 * sigma / n.sqrt() * 2.0, "mean {mean}");
}

#[test]
fn outliers_appear_at_the_configured_rate() {
    let spec = SyntheticSpec {
        density: 1.0,
        depth_noise: 0.0,
        outlier_fraction: 0.1,
        ..SyntheticSpec::default()
    };
    let scene = SyntheticScene::new(spec);
    let cam = scene.input_camera(2, 3);
    let samples = scene.sample_points(std::slice::from_ref(&cam), 3, 5);
    let outliers = samples
        .iter()
        .filter(|s| (s.sampled_depth / s.true_depth - 1.0).abs() > 1e-12)
        .count();
    let rate = outliers as f64 / samples.len() as f64;
    // binomial standard error is about 0.002 here
    assert!((rate - 0.1).abs() < 0.01, "outlier rate {rate}");
}

#[test]
fn empty_toggle_set_equals_plain_render() {
    let data = generate_synthetic(&common::small_spec(), 3).unwrap();
    let params = &data.spec.solver;
    let rows = ablate(
        &data.frames,
        &data.clouds,
        &data.path,
        params,
        &[],
        Some(&data.ground_truth),
    )
    .unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].config, "full");
    let outputs = render_sequence(
        &data.frames,
        &data.clouds,
        &data.path,
        params,
        &Ablation::default(),
    )
    .unwrap();
    let rendered: Vec<RenderedFrame> = outputs.iter().map(|o| o.frame.clone()).collect();
    let coverage: Vec<_> = outputs.iter().map(|o| o.coverage.clone()).collect();
    let expected = compute_metrics(&rendered, Some(&data.ground_truth), Some(&coverage)).unwrap();
    assert_eq!(rows[0].frames, expected);
}

#[test]
fn single_frame_sequence_is_a_single_frame_solve() {
    let data = generate_synthetic(&common::small_spec(), 6).unwrap();
    let params = &data.spec.solver;
    let path = CameraPath {
        poses: data.path.poses[..1].to_vec(),
    };
    let out = render_sequence(
        &data.frames,
        &data.clouds,
        &path,
        params,
        &Ablation::default(),
    )
    .unwrap();
    assert_eq!(out.len(), 1);
    let (inputs, _) = frame_inputs(&data.frames, &data.clouds, &path, 0, params, None);
    assert!(inputs.previous.is_none());
    let direct = multiscale_solve(&inputs, params, &Ablation::default()).unwrap();
    assert_eq!(out[0].frame.depth, direct.depth);
    assert_eq!(out[0].frame.color, direct.color);
    // with λ_T = 0 nothing changes either
    let no_t = SolverParams {
        lambda_t: 0.0,
        ..params.clone()
    };
    let out0 = render_sequence(
        &data.frames,
        &data.clouds,
        &path,
        &no_t,
        &Ablation::default(),
    )
    .unwrap();
    assert_eq!(out0[0].frame, out[0].frame);
    let rows = compute_metrics(&[out[0].frame.clone()], None, None).unwrap();
    assert_eq!(rows[0].temporal_delta, None);
}

#[test]
fn static_scene_stays_below_the_unregularized_first_change() {
    let data = generate_synthetic(&common::static_spec(), 3).unwrap();
    let run = |lambda_t: f64| {
        let params = SolverParams {
            lambda_t,
            ..data.spec.solver.clone()
        };
        let out = with_threads(1, || {
            render_sequence(
                &data.frames,
                &data.clouds,
                &data.path,
                &params,
                &Ablation::default(),
            )
        })
        .unwrap()
        .unwrap();
        let frames: Vec<RenderedFrame> = out.into_iter().map(|o| o.frame).collect();
        compute_metrics(&frames, None, None).unwrap()
    };
    let free = run(0.0);
    let reference = free[1].temporal_delta.unwrap();
    let regularized = run(data.spec.solver.lambda_t);
    let deltas: Vec<f64> = regularized[1..]
        .iter()
        .map(|r| r.temporal_delta.unwrap())
        .collect();
    println!("λ_T = 0 first change {reference:.5}; regularized {deltas:.5?}");
    for (t, d) in deltas.iter().enumerate() {
        assert!(
            *d < reference,
            "frame {}→{}: {d} ≥ {reference}",
            t + 1,
            t + 2
        );
    }
}

#[test]
fn metrics_match_per_pixel_oracle() {
    let mut r = common::rng(77);
    let (w, h) = (13, 7);
    let random_color = |r: &mut rand_chacha::ChaCha8Rng| {
        Grid::from_fn(w, h, |_, _| Rgb::new(r.random(), r.random(), r.random()))
    };
    let frames: Vec<RenderedFrame> = (0..3)
        .map(|t| RenderedFrame {
            color: random_color(&mut r),
            depth: Grid::from_fn(w, h, |_, _| r.random_range(1.0..4.0)),
            time_index: t,
        })
        .collect();
    let gt: Vec<RenderedFrame> = (0..3)
        .map(|t| RenderedFrame {
            color: random_color(&mut r),
            // a third of the pixels have no ground-truth depth
            depth: Grid::from_fn(w, h, |_, _| {
                if r.random_bool(1.0 / 3.0) {
                    0.0
                } else {
                    r.random_range(1.0..4.0)
                }
            }),
            time_index: t,
        })
        .collect();
    let coverage: Vec<Grid<bool>> = (0..3)
        .map(|_| Grid::from_fn(w, h, |_, _| r.random_bool(0.6)))
        .collect();
    let rows = compute_metrics(&frames, Some(&gt), Some(&coverage)).unwrap();

    for t in 0..3 {
        let (mut sse, mut dsse, mut dn, mut tsum, mut cov) = (0.0, 0.0, 0usize, 0.0, 0usize);
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let e = frames[t].color.get(x, y)[c] - gt[t].color.get(x, y)[c];
                    sse += e * e;
                    if t > 0 {
                        tsum +=
                            (frames[t].color.get(x, y)[c] - frames[t - 1].color.get(x, y)[c]).abs();
                    }
                }
                let g = *gt[t].depth.get(x, y);
                if g > 0.0 {
                    dsse += (frames[t].depth.get(x, y) - g).powi(2);
                    dn += 1;
                }
                cov += usize::from(*coverage[t].get(x, y));
            }
        }
        let n = (w * h) as f64;
        let expected = FrameMetrics {
            frame_index: t,
            psnr_db: Some(10.0 * (1.0 / (sse / (3.0 * n))).log10()),
            depth_rmse: Some((dsse / dn as f64).sqrt()),
            temporal_delta: (t > 0).then(|| tsum / (3.0 * n)),
            coverage: Some(cov as f64 / n),
        };
        let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-12 * b.abs().max(1.0),
            (None, None) => true,
            _ => false,
        };
        let got = rows[t];
        assert_eq!(got.frame_index, expected.frame_index);
        assert!(close(got.psnr_db, expected.psnr_db), "t={t} psnr");
        assert!(close(got.depth_rmse, expected.depth_rmse), "t={t} rmse");
        assert!(
            close(got.temporal_delta, expected.temporal_delta),
            "t={t} delta"
        );
        assert!(close(got.coverage, expected.coverage), "t={t} coverage");
    }

    // identical frames hit the cap; ground truth must cover every frame
    let same = compute_metrics(&frames[..1], Some(&frames[..1]), None).unwrap();
    assert_eq!(same[0].psnr_db, Some(PSNR_CAP_DB));
    assert!(compute_metrics(&frames, Some(&gt[..2]), None).is_err());
}
