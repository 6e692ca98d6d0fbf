//! Jacobi-preconditioned conjugate gradients on a [`StencilSystem`].

use rayon::prelude::*;

use super::system::{dot, StencilSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b − Hx‖ / ‖b‖` at the returned iterate (absolute when `b = 0`).
    pub rel_residual: f64,
    pub converged: bool,
}

/// Solves `H x = b` starting from `x0`. Stops when the relative residual drops
/// below `tolerance` or after `max_iters` iterations; the last iterate is
/// returned either way and `stats.converged` tells which.
pub fn pcg(
    sys: &StencilSystem,
    x0: &[f64],
    tolerance: f64,
    max_iters: usize,
) -> (Vec<f64>, SolveStats) {
    let n = sys.len();
    let width = sys.width();
    assert_eq!(x0.len(), n, "initial guess has the wrong length");
    let b = sys.rhs();
    let b_norm = dot(b, b, width).sqrt();
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };

    let inv_diag: Vec<f64> = sys
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    sys.apply(&x, &mut r);
    r.par_iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);

    let mut rel = dot(&r, &r, width).sqrt() / scale;
    if rel <= tolerance || n == 0 {
        return (
            x,
            SolveStats {
                iterations: 0,
                rel_residual: rel,
                converged: true,
            },
        );
    }

    let mut z: Vec<f64> = r.par_iter().zip(&inv_diag).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut hp = vec![0.0; n];
    let mut rz = dot(&r, &z, width);

    for it in 1..=max_iters {
        sys.apply(&p, &mut hp);
        let php = dot(&p, &hp, width);
        if !(php > 0.0) {
            // Direction in the null space: nothing left to reduce.
            return (
                x,
                SolveStats {
                    iterations: it - 1,
                    rel_residual: rel,
                    converged: rel <= tolerance,
                },
            );
        }
        let alpha = rz / php;
        x.par_iter_mut()
            .zip(&p)
            .for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut()
            .zip(&hp)
            .for_each(|(ri, hi)| *ri -= alpha * hi);
        rel = dot(&r, &r, width).sqrt() / scale;
        if rel <= tolerance {
            return (
                x,
                SolveStats {
                    iterations: it,
                    rel_residual: rel,
                    converged: true,
                },
            );
        }
        z.par_iter_mut()
            .zip(&r)
            .zip(&inv_diag)
            .for_each(|((zi, ri), m)| *zi = ri * m);
        let rz_new = dot(&r, &z, width);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    (
        x,
        SolveStats {
            iterations: max_iters,
            rel_residual: rel,
            converged: false,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_system(w: usize, h: usize) -> StencilSystem {
        let mut sys = StencilSystem::new(w, h);
        for i in 0..w * h {
            sys.add_east(i, 1.0 + (i % 3) as f64, 0.0);
            sys.add_south(i, 0.5, 0.0);
            if i % 7 == 0 {
                sys.add_data(i, 2.0, (i as f64 * 0.37).sin());
            }
        }
        sys
    }

    #[test]
    fn matches_dense_solve() {
        let sys = poisson_system(9, 6);
        let (x, stats) = pcg(&sys, &vec![0.0; 54], 1e-12, 500);
        assert!(stats.converged);
        let dense = sys.to_dense();
        let b = nalgebra::DVector::from_column_slice(sys.rhs());
        let exact = dense.cholesky().unwrap().solve(&b);
        for (a, e) in x.iter().zip(exact.iter()) {
            assert!((a - e).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_start_needs_no_iterations() {
        let mut sys = StencilSystem::new(4, 4);
        for i in 0..16 {
            sys.add_data(i, 1.0, 3.0);
            sys.add_east(i, 1.0, 0.0);
        }
        let (x, stats) = pcg(&sys, &[3.0; 16], 1e-10, 10);
        assert_eq!(stats.iterations, 0);
        assert_eq!(x, vec![3.0; 16]);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let sys = poisson_system(20, 20);
        let (_, stats) = pcg(&sys, &vec![0.0; 400], 1e-14, 2);
        assert!(!stats.converged);
        assert_eq!(stats.iterations, 2);
    }
}
