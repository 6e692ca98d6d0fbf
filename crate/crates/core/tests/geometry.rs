mod common;

use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::Rng;

use nvs_diffusion::geometry::{
    angle_axis_to_rotation, intrinsics, rotation_to_angle_axis, splat_points, visibility_maps,
    warp_frame, DepthSample, Pixel, ViewTag,
};
use nvs_diffusion::{CameraPose, ColoredPoint, Grid, Rgb, TimestepPointCloud};

const W: usize = 64;
const H: usize = 48;

fn camera(rotation: Matrix3<f64>, center: Vector3<f64>) -> CameraPose {
    CameraPose::new(
        intrinsics(60.0, 60.0, 31.5, 23.5),
        rotation,
        center,
        0,
        ViewTag::Virtual,
    )
    .expect("valid camera")
}

/// Smooth color texture on the plane `z = PLANE_Z`.
fn texture(p: &Vector3<f64>) -> Rgb {
    Rgb::new(
        0.5 + 0.4 * (1.3 * p.x).sin() * (1.7 * p.y).cos(),
        0.5 + 0.3 * (0.9 * p.x + 0.4 * p.y).cos(),
        0.5 + 0.2 * (2.1 * p.y).sin(),
    )
}

const PLANE_Z: f64 = 5.0;

/// Ray-casts the plane directly: returns color and camera depth per pixel.
fn render_plane(cam: &CameraPose) -> (Grid<Rgb>, Grid<f64>) {
    let kinv = cam.intrinsics.try_inverse().expect("invertible K");
    let mut color = Grid::filled(W, H, Rgb::zeros());
    let mut depth = Grid::filled(W, H, 0.0);
    for y in 0..H {
        for x in 0..W {
            let dir = cam.rotation.transpose() * (kinv * Vector3::new(x as f64, y as f64, 1.0));
            let s = (PLANE_Z - cam.center.z) / dir.z;
            let p = cam.center + dir * s;
            color.set(x, y, texture(&p));
            depth.set(x, y, (cam.rotation * (p - cam.center)).z);
        }
    }
    (color, depth)
}

#[test]
fn warped_plane_matches_direct_render() {
    let dst = camera(Matrix3::identity(), Vector3::zeros());
    let src = camera(
        angle_axis_to_rotation(&Vector3::new(0.02, -0.08, 0.01)),
        Vector3::new(0.4, 0.1, 0.2),
    );
    let (dst_color, dst_depth) = render_plane(&dst);
    let (src_color, _) = render_plane(&src);
    let warped = warp_frame(&src_color, &src, &dst, &dst_depth);
    let mut checked = 0;
    let mut worst = 0.0f64;
    for y in 1..H - 1 {
        for x in 1..W - 1 {
            if !*warped.valid.get(x, y) {
                continue;
            }
            let diff = (warped.image.get(x, y) - dst_color.get(x, y)).amax();
            worst = worst.max(diff);
            checked += 1;
        }
    }
    assert!(checked > W * H / 2, "only {checked} valid pixels");
    assert!(worst <= 0.02, "max per-channel error {worst}");
}

#[test]
fn distant_depth_reduces_to_rotation_homography() {
    let dst = camera(Matrix3::identity(), Vector3::zeros());
    let src = camera(
        angle_axis_to_rotation(&Vector3::new(0.03, 0.05, -0.02)),
        Vector3::new(0.3, -0.2, 0.1),
    );
    let (src_color, _) = render_plane(&src);
    let depth = Grid::filled(W, H, 1e8);
    let warped = warp_frame(&src_color, &src, &dst, &depth);
    let homography = src.intrinsics
        * src.rotation
        * dst.rotation.transpose()
        * dst.intrinsics.try_inverse().unwrap();
    let mut checked = 0;
    for y in 0..H {
        for x in 0..W {
            let h = homography * Vector3::new(x as f64, y as f64, 1.0);
            let expected = src_color.sample_bilinear(h.x / h.z, h.y / h.z);
            match expected {
                Some(c) if *warped.valid.get(x, y) => {
                    let diff = (warped.image.get(x, y) - c).amax();
                    assert!(diff <= 1e-3, "pixel ({x},{y}) differs by {diff}");
                    checked += 1;
                }
                _ => {}
            }
        }
    }
    assert!(checked > W * H / 2);
}

#[test]
fn splat_matches_brute_force_projection() {
    let cam = camera(
        angle_axis_to_rotation(&Vector3::new(0.0, 0.1, 0.0)),
        Vector3::new(0.2, 0.0, 0.0),
    );
    let mut rng = common::rng(17);
    let points: Vec<ColoredPoint> = (0..500)
        .map(|_| {
            let position = Vector3::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-3.0..3.0),
                // a few points land behind the camera
                rng.random_range(-1.0..8.0),
            );
            ColoredPoint {
                position,
                color: Rgb::new(rng.random(), rng.random(), rng.random()),
            }
        })
        .collect();
    let cloud = TimestepPointCloud::new(0, points.clone());
    let maps = splat_points(&cloud, &cam, W, H);

    // Brute force: x_cam = R(p − C), u = f·X/Z + c, nearest pixel, keep min depth.
    let mut best: HashMap<(usize, usize), f64> = HashMap::new();
    let mut in_frustum = 0;
    for p in &points {
        let q = cam.rotation * (p.position - cam.center);
        if q.z <= 0.0 {
            continue;
        }
        let u = (60.0 * q.x / q.z + 31.5).round();
        let v = (60.0 * q.y / q.z + 23.5).round();
        if u < 0.0 || v < 0.0 || u >= W as f64 || v >= H as f64 {
            continue;
        }
        in_frustum += 1;
        let e = best
            .entry((u as usize, v as usize))
            .or_insert(f64::INFINITY);
        *e = e.min(q.z);
    }
    let collisions = in_frustum - best.len();
    assert_eq!(maps.occupied_count(), in_frustum - collisions);
    for ((x, y), d) in best {
        assert!(*maps.occupied.get(x, y));
        assert!((maps.depth.get(x, y) - d).abs() < 1e-12);
    }
}

#[test]
fn near_strip_occludes_far_plane() {
    // Far plane at z = 6, a vertical strip |x| ≤ 0.3 at z = 3, seen by the
    // destination camera at the origin; the source camera sits at x = 0.8.
    let dst = camera(Matrix3::identity(), Vector3::zeros());
    let src = camera(Matrix3::identity(), Vector3::new(0.8, 0.0, 0.0));
    let dx = |x: usize| (x as f64 - 31.5) / 60.0;
    let depth = Grid::from_fn(
        W,
        H,
        |x, _| if (3.0 * dx(x)).abs() <= 0.3 { 3.0 } else { 6.0 },
    );
    let vis = visibility_maps(&dst, &depth, &src, W, H);

    let mut checked = 0;
    for y in 0..H {
        for x in 0..W {
            let d = *depth.get(x, y);
            let p = dst.unproject(DepthSample {
                pixel: Pixel::new(x as f64, y as f64),
                depth: d,
            });
            let Some((pix, _)) = src.project(&p).visible() else {
                continue;
            };
            let inside =
                pix.u > 1.0 && pix.v > 1.0 && pix.u < W as f64 - 2.0 && pix.v < H as f64 - 2.0;
            let outside = pix.u < -1.0 || pix.v < -1.0 || pix.u > W as f64 || pix.v > H as f64;
            if outside {
                assert!(!*vis.get(x, y), "({x},{y}) projects outside the source");
                continue;
            }
            if !inside {
                continue;
            }
            // stay clear of the strip edges in both views
            let strip_x = 3.0 * dx(x);
            if (strip_x.abs() - 0.3).abs() < 0.1 {
                continue;
            }
            let expected = if d == 3.0 {
                true
            } else {
                // where the segment source → point crosses z = 3
                let cross = 0.4 + 3.0 * dx(x);
                if (cross.abs() - 0.3).abs() < 0.1 {
                    continue;
                }
                cross.abs() > 0.3
            };
            assert_eq!(*vis.get(x, y), expected, "pixel ({x},{y}), depth {d}");
            checked += 1;
        }
    }
    assert!(checked > W * H / 3, "only {checked} pixels checked");
}

proptest! {
    #[test]
    fn project_unproject_roundtrip(
        u in -20.0f64..84.0,
        v in -20.0f64..68.0,
        depth in 0.05f64..100.0,
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0,
        cx in -5.0f64..5.0, cy in -5.0f64..5.0, cz in -5.0f64..5.0,
    ) {
        let cam = camera(angle_axis_to_rotation(&Vector3::new(ax, ay, az)), Vector3::new(cx, cy, cz));
        let p = cam.unproject(DepthSample { pixel: Pixel::new(u, v), depth });
        let (pix, d) = cam.project(&p).visible().expect("in front");
        prop_assert!((pix.u - u).abs() < 1e-6 && (pix.v - v).abs() < 1e-6 && (d - depth).abs() < 1e-6);
    }

    #[test]
    fn rotation_roundtrip(ax in -3.0f64..3.0, ay in -3.0f64..3.0, az in -3.0f64..3.0) {
        let a = Vector3::new(ax, ay, az);
        prop_assume!(a.norm() < std::f64::consts::PI - 1e-6);
        let r = angle_axis_to_rotation(&a);
        prop_assert!((angle_axis_to_rotation(&rotation_to_angle_axis(&r)) - r).norm() < 1e-9);
    }
}
