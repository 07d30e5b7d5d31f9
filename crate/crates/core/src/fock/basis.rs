use crate::error::{GsbError, Result};

/// Default cap on the number of occupation states.
pub const DEFAULT_MAX_DIM: usize = 2_000_000;

/// Occupation-number basis of the bosonic Fock space over `n_modes` modes,
/// truncated at `n_max` total quanta.
///
/// States are ordered by total occupation, then in decreasing lexicographic
/// order within each total, e.g. `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n_modes: usize,
    n_max: usize,
    dim: usize,
    occ: Vec<u16>,
    // counts[l][a] = number of l-tuples with sum <= a = C(a + l, l)
    counts: Vec<Vec<usize>>,
}

fn count_table(n_modes: usize, n_max: usize) -> Vec<Vec<u128>> {
    let mut t = vec![vec![1u128; n_max + 1]; n_modes + 1];
    for l in 1..=n_modes {
        for a in 1..=n_max {
            t[l][a] = t[l - 1][a].saturating_add(t[l][a - 1]);
        }
    }
    t
}

/// `C(n_modes + n_max, n_modes)` without overflow (saturating).
pub fn fock_dimension(n_modes: usize, n_max: usize) -> u128 {
    count_table(n_modes, n_max)[n_modes][n_max]
}

impl FockBasis {
    pub fn new(n_modes: usize, n_max: usize) -> Result<Self> {
        Self::with_max_dim(n_modes, n_max, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(n_modes: usize, n_max: usize, max_dim: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(GsbError::InvalidArgument("Fock basis needs at least one mode".into()));
        }
        if n_max > u16::MAX as usize {
            return Err(GsbError::InvalidArgument(format!("n_max {n_max} is too large")));
        }
        let table = count_table(n_modes, n_max);
        let dim = table[n_modes][n_max];
        if dim > max_dim as u128 {
            return Err(GsbError::BasisTooLarge { dim, max: max_dim });
        }
        let counts = table
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as usize).collect())
            .collect();
        let dim = dim as usize;
        let mut occ = Vec::with_capacity(dim * n_modes);
        let mut cur = vec![0u16; n_modes];
        for total in 0..=n_max {
            fill_grade(&mut cur, 0, total, &mut occ);
        }
        debug_assert_eq!(occ.len(), dim * n_modes);
        Ok(FockBasis {
            n_modes,
            n_max,
            dim,
            occ,
            counts,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, t: usize) -> &[u16] {
        &self.occ[t * self.n_modes..(t + 1) * self.n_modes]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u16]> {
        self.occ.chunks_exact(self.n_modes)
    }

    pub fn total(&self, t: usize) -> usize {
        self.state(t).iter().map(|&n| n as usize).sum()
    }

    /// First index of the states carrying exactly `total` quanta.
    pub fn grade_offset(&self, total: usize) -> usize {
        if total == 0 {
            0
        } else {
            self.counts[self.n_modes][total - 1]
        }
    }

    /// Index range of the maximal-quanta layer.
    pub fn top_layer(&self) -> std::ops::Range<usize> {
        self.grade_offset(self.n_max)..self.dim
    }

    /// Position of an occupation tuple, or `None` when it lies outside the truncation.
    pub fn index(&self, occ: &[u16]) -> Option<usize> {
        if occ.len() != self.n_modes {
            return None;
        }
        let total: usize = occ.iter().map(|&n| n as usize).sum();
        if total > self.n_max {
            return None;
        }
        let mut rank = self.grade_offset(total);
        let mut remaining = total;
        for (k, &n) in occ.iter().enumerate().take(self.n_modes - 1) {
            let n = n as usize;
            let tail = self.n_modes - k - 1;
            if remaining > n {
                rank += self.counts[tail][remaining - n - 1];
            }
            remaining -= n;
        }
        Some(rank)
    }
}

fn fill_grade(cur: &mut [u16], pos: usize, remaining: usize, out: &mut Vec<u16>) {
    if pos == cur.len() - 1 {
        cur[pos] = remaining as u16;
        out.extend_from_slice(cur);
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v as u16;
        fill_grade(cur, pos + 1, remaining - v, out);
    }
    cur[pos] = 0;
}
