use rayon::prelude::*;

use crate::linalg::C64;

/// Row-compressed complex sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub values: Vec<C64>,
}

impl Csr {
    /// Builds from unordered triplets; duplicates are summed, exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != C64::new(0.0, 0.0));
        let mut indptr = vec![0usize; nrows + 1];
        for &(r, _, _) in &merged {
            indptr[r + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Csr {
            nrows,
            ncols,
            indptr,
            indices: merged.iter().map(|t| t.1 as u32).collect(),
            values: merged.iter().map(|t| t.2).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b]
            .iter()
            .zip(&self.values[a..b])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(c, v)| (i, c, v)))
            .collect()
    }

    /// `y = A x`, rows in parallel; each row is reduced sequentially.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[k] * x[self.indices[k] as usize];
            }
            *yi = s;
        });
    }

    /// `y = A^H x`
    pub fn adjoint_apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for i in 0..self.nrows {
            let xi = x[i];
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k] as usize] += self.values[k].conj() * xi;
            }
        }
    }

    pub fn conj_transpose(&self) -> Csr {
        let t = self
            .triplets()
            .into_iter()
            .map(|(r, c, v)| (c, r, v.conj()))
            .collect();
        Csr::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| {
                self.row(i)
                    .find(|&(c, _)| c == i)
                    .map_or(C64::new(0.0, 0.0), |(_, v)| v)
            })
            .collect()
    }

    /// Sparse product `self * rhs` (Gustavson).
    pub fn matmul(&self, rhs: &Csr) -> Csr {
        assert_eq!(self.ncols, rhs.nrows);
        let mut acc = vec![C64::new(0.0, 0.0); rhs.ncols];
        let mut mark = vec![usize::MAX; rhs.ncols];
        let mut cols = Vec::new();
        let mut triplets = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = C64::new(0.0, 0.0);
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                triplets.push((i, j, acc[j]));
            }
        }
        Csr::from_triplets(self.nrows, rhs.ncols, triplets)
    }
}
