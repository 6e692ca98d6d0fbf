//! Matrix-free 5-point stencil systems on the pixel grid.
//!
//! Every energy in this crate is a sum of pixel terms `a·(z_i - t)²` and
//! forward-difference edge terms `w·(z_j - z_i - g)²`. A [`StencilSystem`]
//! stores the Hessian `H` and right-hand side `b` of such an energy, so
//! `H z - b` is exactly its gradient.

use rayon::prelude::*;

/// Rows per parallel work item. Reductions are summed per row and then in
/// row order, so results do not depend on the thread count.
const ROWS_PER_TASK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct StencilSystem {
    width: usize,
    height: usize,
    /// Pixel data weights `a_i`.
    data: Vec<f64>,
    /// Weight of the edge from `i` to its right neighbour.
    east: Vec<f64>,
    /// Weight of the edge from `i` to the pixel below.
    south: Vec<f64>,
    rhs: Vec<f64>,
}

impl StencilSystem {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            data: vec![0.0; n],
            east: vec![0.0; n],
            south: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Adds `weight·(z_i - target)²`.
    #[inline]
    pub fn add_data(&mut self, i: usize, weight: f64, target: f64) {
        self.data[i] += weight;
        self.rhs[i] += 2.0 * weight * target;
    }

    /// Adds `weight·(z_{i+1} - z_i - target)²`. Ignored on the last column.
    #[inline]
    pub fn add_east(&mut self, i: usize, weight: f64, target: f64) {
        if (i + 1).is_multiple_of(self.width) {
            return;
        }
        self.east[i] += weight;
        self.rhs[i + 1] += 2.0 * weight * target;
        self.rhs[i] -= 2.0 * weight * target;
    }

    /// Adds `weight·(z_{i+W} - z_i - target)²`. Ignored on the last row.
    #[inline]
    pub fn add_south(&mut self, i: usize, weight: f64, target: f64) {
        if i + self.width >= self.data.len() {
            return;
        }
        self.south[i] += weight;
        self.rhs[i + self.width] += 2.0 * weight * target;
        self.rhs[i] -= 2.0 * weight * target;
    }

    /// Diagonal of `H`.
    pub fn diagonal(&self) -> Vec<f64> {
        let w = self.width;
        (0..self.len())
            .map(|i| {
                let mut d = self.data[i] + self.east[i] + self.south[i];
                if !i.is_multiple_of(w) {
                    d += self.east[i - 1];
                }
                if i >= w {
                    d += self.south[i - w];
                }
                2.0 * d
            })
            .collect()
    }

    #[inline]
    fn apply_at(&self, z: &[f64], i: usize) -> f64 {
        let w = self.width;
        let zi = z[i];
        let mut acc = self.data[i] * zi;
        acc += self.east[i] * (zi - z.get(i + 1).copied().unwrap_or(zi));
        acc += self.south[i] * (zi - z.get(i + w).copied().unwrap_or(zi));
        if !i.is_multiple_of(w) {
            acc += self.east[i - 1] * (zi - z[i - 1]);
        }
        if i >= w {
            acc += self.south[i - w] * (zi - z[i - w]);
        }
        2.0 * acc
    }

    /// `out = H z`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let w = self.width.max(1);
        out.par_chunks_mut(w * ROWS_PER_TASK)
            .enumerate()
            .for_each(|(chunk, rows)| {
                let base = chunk * w * ROWS_PER_TASK;
                for (k, o) in rows.iter_mut().enumerate() {
                    *o = self.apply_at(z, base + k);
                }
            });
    }

    /// Gradient of the energy at `z`: `H z - b`.
    pub fn residual(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.apply(z, &mut out);
        out.iter_mut().zip(&self.rhs).for_each(|(o, b)| *o -= b);
        out
    }

    /// Dense copy of `H`, for small problems and diagnostics.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
            e[j] = 0.0;
        }
        m
    }

    /// True when all weights are non-negative and every row of `H` is weakly
    /// diagonally dominant (Gershgorin discs in the right half-plane).
    pub fn is_diagonally_dominant(&self) -> bool {
        let w = self.width;
        let nonneg = self
            .data
            .iter()
            .chain(&self.east)
            .chain(&self.south)
            .all(|&v| v >= 0.0 && v.is_finite());
        nonneg
            && (0..self.len()).all(|i| {
                let mut off = self.east[i] + self.south[i];
                if !i.is_multiple_of(w) {
                    off += self.east[i - 1];
                }
                if i >= w {
                    off += self.south[i - w];
                }
                self.data[i] + off >= off
            })
    }

    /// Sum of pixel data weights; zero means the system has a constant null space.
    pub fn total_data_weight(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Deterministic dot product: per-row partial sums added in row order.
pub fn dot(a: &[f64], b: &[f64], width: usize) -> f64 {
    let w = width.max(1);
    let partials: Vec<f64> = a
        .par_chunks(w)
        .zip(b.par_chunks(w))
        .with_min_len(ROWS_PER_TASK)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>())
        .collect();
    partials.iter().sum()
}
