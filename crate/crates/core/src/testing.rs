//! Dense brute-force reference implementations for tests.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::fock::FockBasis;
use crate::linalg::C64;

/// Truncated Fock space enumerated as occupation tuples, with a hash index.
pub struct DenseFock {
    pub states: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl DenseFock {
    pub fn new(m: usize, n_max: usize) -> Self {
        let mut states = Vec::new();
        let mut cur = vec![0; m];
        loop {
            if cur.iter().sum::<usize>() <= n_max {
                states.push(cur.clone());
            }
            let mut k = 0;
            while k < m {
                cur[k] += 1;
                if cur[k] <= n_max {
                    break;
                }
                cur[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        DenseFock { states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn annihilator(&self, mode: usize) -> DMatrix<C64> {
        let n = self.states.len();
        let mut a = DMatrix::zeros(n, n);
        for (col, s) in self.states.iter().enumerate() {
            if s[mode] > 0 {
                let mut t = s.clone();
                t[mode] -= 1;
                a[(self.index[&t], col)] = C64::new((s[mode] as f64).sqrt(), 0.0);
            }
        }
        a
    }

    /// Position of each dense state in the library basis.
    pub fn library_positions(&self, basis: &FockBasis) -> Vec<usize> {
        self.states
            .iter()
            .map(|s| {
                let occ: Vec<u16> = s.iter().map(|&n| n as u16).collect();
                basis.index(&occ).expect("state present in both bases")
            })
            .collect()
    }

    /// Reorders a `C^d ⊗ F` vector from dense to library ordering.
    pub fn to_library(&self, basis: &FockBasis, v: &[C64]) -> Vec<C64> {
        let fd = self.dim();
        let pos = self.library_positions(basis);
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for m in 0..v.len() / fd {
            for (k, &l) in pos.iter().enumerate() {
                out[m * fd + l] = v[m * fd + k];
            }
        }
        out
    }

    pub fn from_library(&self, basis: &FockBasis, v: &[C64]) -> Vec<C64> {
        let fd = self.dim();
        let pos = self.library_positions(basis);
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for m in 0..v.len() / fd {
            for (k, &l) in pos.iter().enumerate() {
                out[m * fd + k] = v[m * fd + l];
            }
        }
        out
    }
}

pub fn mat_vec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (m * DMatrix::from_column_slice(v.len(), 1, v)).iter().cloned().collect()
}
