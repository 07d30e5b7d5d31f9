//! Vector kernels shared by the solvers.
//!
//! Reductions are split into fixed-size chunks whose partial sums are combined
//! pairwise in a fixed order, so the result does not depend on how rayon
//! schedules the chunks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type C64 = Complex64;

const CHUNK: usize = 4096;

pub(crate) fn pairwise_sum<T: Copy + std::ops::Add<Output = T>>(mut parts: Vec<T>, zero: T) -> T {
    if parts.is_empty() {
        return zero;
    }
    while parts.len() > 1 {
        let next = parts
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
        parts = next;
    }
    parts[0]
}

/// `<x, y>` with the first argument conjugated.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    let parts: Vec<C64> = x
        .par_chunks(CHUNK)
        .zip(y.par_chunks(CHUNK))
        .map(|(a, b)| a.iter().zip(b).fold(C64::new(0.0, 0.0), |s, (u, v)| s + u.conj() * v))
        .collect();
    pairwise_sum(parts, C64::new(0.0, 0.0))
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    let parts: Vec<f64> = x
        .par_chunks(CHUNK)
        .map(|a| a.iter().map(|v| v.norm_sqr()).sum::<f64>())
        .collect();
    pairwise_sum(parts, 0.0)
}

pub fn norm(x: &[C64]) -> f64 {
    norm_sqr(x).sqrt()
}

/// `y += a * x`
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += a * xi);
}

pub fn scale(a: C64, x: &mut [C64]) {
    x.par_iter_mut().for_each(|v| *v *= a);
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Normalizes in place and returns the previous norm.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(C64::new(1.0 / n, 0.0), x);
    }
    n
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex vector with independent uniform(-1, 1) real and imaginary parts.
pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn to_complex_matrix(rows: &[Vec<f64>]) -> DMatrix<C64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and eigenvectors of a small dense hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}
