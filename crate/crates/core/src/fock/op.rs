use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::basis::FockBasis;
use super::csr::Csr;
use crate::linalg::{self, C64};

/// Dimension at or below which operators are materialized as sparse matrices.
pub const DEFAULT_SPARSE_THRESHOLD: usize = 200_000;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
enum Kind {
    Identity,
    Zero,
    Diagonal(Arc<Vec<C64>>),
    Sparse(Arc<Csr>),
    /// `sum_i c_i a_i` (or `sum_i c_i a*_i` projected onto the truncation).
    Ladder {
        basis: Arc<FockBasis>,
        coeffs: Vec<C64>,
        creation: bool,
    },
    /// `matter ⊗ fock` with the matter index major.
    Kron {
        matter: DMatrix<C64>,
        fock: Box<LinOp>,
    },
    Sum(Vec<LinOp>),
    Scaled(C64, Box<LinOp>),
    /// `ops[0] * ops[1] * ... * ops[n-1]`
    Product(Vec<LinOp>),
}

/// Linear operator on a finite-dimensional complex space, applied either
/// matrix-free or from cached sparse storage.
#[derive(Clone, Debug)]
pub struct LinOp {
    dim: usize,
    hermitian: bool,
    kind: Kind,
}

impl LinOp {
    pub fn identity(dim: usize) -> Self {
        LinOp {
            dim,
            hermitian: true,
            kind: Kind::Identity,
        }
    }

    pub fn zero(dim: usize) -> Self {
        LinOp {
            dim,
            hermitian: true,
            kind: Kind::Zero,
        }
    }

    pub fn diagonal(entries: Vec<C64>) -> Self {
        let hermitian = entries.iter().all(|v| v.im == 0.0);
        LinOp {
            dim: entries.len(),
            hermitian,
            kind: Kind::Diagonal(Arc::new(entries)),
        }
    }

    pub fn sparse(csr: Csr, hermitian: bool) -> Self {
        assert_eq!(csr.nrows, csr.ncols, "operators are square");
        LinOp {
            dim: csr.nrows,
            hermitian,
            kind: Kind::Sparse(Arc::new(csr)),
        }
    }

    pub(crate) fn ladder(basis: Arc<FockBasis>, coeffs: Vec<C64>, creation: bool) -> Self {
        assert_eq!(coeffs.len(), basis.n_modes());
        LinOp {
            dim: basis.dim(),
            hermitian: false,
            kind: Kind::Ladder {
                basis,
                coeffs,
                creation,
            },
        }
    }

    pub fn kron(matter: DMatrix<C64>, fock: LinOp) -> Self {
        assert_eq!(matter.nrows(), matter.ncols(), "matter operator must be square");
        let hermitian = fock.hermitian && linalg::hermitian_deviation(&matter) == 0.0;
        LinOp {
            dim: matter.nrows() * fock.dim,
            hermitian,
            kind: Kind::Kron {
                matter,
                fock: Box::new(fock),
            },
        }
    }

    pub fn sum(ops: Vec<LinOp>) -> Self {
        assert!(!ops.is_empty());
        let dim = ops[0].dim;
        assert!(ops.iter().all(|o| o.dim == dim), "summands must share a dimension");
        let hermitian = ops.iter().all(|o| o.hermitian);
        LinOp {
            dim,
            hermitian,
            kind: Kind::Sum(ops),
        }
    }

    pub fn scaled(self, factor: C64) -> Self {
        LinOp {
            dim: self.dim,
            hermitian: self.hermitian && factor.im == 0.0,
            kind: Kind::Scaled(factor, Box::new(self)),
        }
    }

    /// Composition `self * rhs`.
    pub fn compose(self, rhs: LinOp) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut ops = match self.kind {
            Kind::Product(ops) => ops,
            kind => vec![LinOp { kind, ..self }],
        };
        match rhs.kind {
            Kind::Product(more) => ops.extend(more),
            kind => ops.push(LinOp { kind, ..rhs }),
        }
        LinOp {
            dim: ops[0].dim,
            hermitian: false,
            kind: Kind::Product(ops),
        }
    }

    /// Marks the operator hermitian (caller's responsibility).
    pub fn assume_hermitian(mut self) -> Self {
        self.hermitian = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.kind, Kind::Sparse(_))
    }

    pub fn as_csr(&self) -> Option<&Csr> {
        match &self.kind {
            Kind::Sparse(c) => Some(c),
            _ => None,
        }
    }

    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim];
        self.apply(x, &mut y);
        y
    }

    pub fn adjoint_apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim];
        self.adjoint_apply(x, &mut y);
        y
    }

    /// `y = A x` (y is overwritten).
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        match &self.kind {
            Kind::Identity => y.copy_from_slice(x),
            Kind::Zero => y.fill(ZERO),
            Kind::Diagonal(d) => y
                .par_iter_mut()
                .zip(x.par_iter().zip(d.par_iter()))
                .for_each(|(yi, (xi, di))| *yi = di * xi),
            Kind::Sparse(c) => c.apply(x, y),
            Kind::Ladder {
                basis,
                coeffs,
                creation,
            } => ladder_apply(basis, coeffs, *creation, x, y),
            Kind::Kron { matter, fock } => kron_apply(matter, fock, x, y, false),
            Kind::Sum(ops) => {
                ops[0].apply(x, y);
                let mut tmp = vec![ZERO; self.dim];
                for op in &ops[1..] {
                    op.apply(x, &mut tmp);
                    y.par_iter_mut().zip(tmp.par_iter()).for_each(|(a, b)| *a += b);
                }
            }
            Kind::Scaled(f, op) => {
                op.apply(x, y);
                linalg::scale(*f, y);
            }
            Kind::Product(ops) => {
                let mut cur = x.to_vec();
                for op in ops.iter().rev() {
                    op.apply(&cur, y);
                    cur.copy_from_slice(y);
                }
            }
        }
    }

    /// `y = A^H x` (y is overwritten).
    pub fn adjoint_apply(&self, x: &[C64], y: &mut [C64]) {
        if self.hermitian {
            return self.apply(x, y);
        }
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        match &self.kind {
            Kind::Identity => y.copy_from_slice(x),
            Kind::Zero => y.fill(ZERO),
            Kind::Diagonal(d) => y
                .par_iter_mut()
                .zip(x.par_iter().zip(d.par_iter()))
                .for_each(|(yi, (xi, di))| *yi = di.conj() * xi),
            Kind::Sparse(c) => c.adjoint_apply(x, y),
            Kind::Ladder {
                basis,
                coeffs,
                creation,
            } => {
                let conj: Vec<C64> = coeffs.iter().map(|c| c.conj()).collect();
                ladder_apply(basis, &conj, !*creation, x, y)
            }
            Kind::Kron { matter, fock } => kron_apply(matter, fock, x, y, true),
            Kind::Sum(ops) => {
                ops[0].adjoint_apply(x, y);
                let mut tmp = vec![ZERO; self.dim];
                for op in &ops[1..] {
                    op.adjoint_apply(x, &mut tmp);
                    y.par_iter_mut().zip(tmp.par_iter()).for_each(|(a, b)| *a += b);
                }
            }
            Kind::Scaled(f, op) => {
                op.adjoint_apply(x, y);
                linalg::scale(f.conj(), y);
            }
            Kind::Product(ops) => {
                let mut cur = x.to_vec();
                for op in ops.iter() {
                    op.adjoint_apply(&cur, y);
                    cur.copy_from_slice(y);
                }
            }
        }
    }

    /// The adjoint as a new operator.
    pub fn adjoint(&self) -> LinOp {
        if self.hermitian {
            return self.clone();
        }
        let kind = match &self.kind {
            Kind::Identity => Kind::Identity,
            Kind::Zero => Kind::Zero,
            Kind::Diagonal(d) => Kind::Diagonal(Arc::new(d.iter().map(|v| v.conj()).collect())),
            Kind::Sparse(c) => Kind::Sparse(Arc::new(c.conj_transpose())),
            Kind::Ladder {
                basis,
                coeffs,
                creation,
            } => Kind::Ladder {
                basis: basis.clone(),
                coeffs: coeffs.iter().map(|c| c.conj()).collect(),
                creation: !creation,
            },
            Kind::Kron { matter, fock } => Kind::Kron {
                matter: matter.adjoint(),
                fock: Box::new(fock.adjoint()),
            },
            Kind::Sum(ops) => Kind::Sum(ops.iter().map(|o| o.adjoint()).collect()),
            Kind::Scaled(f, op) => Kind::Scaled(f.conj(), Box::new(op.adjoint())),
            Kind::Product(ops) => Kind::Product(ops.iter().rev().map(|o| o.adjoint()).collect()),
        };
        LinOp {
            dim: self.dim,
            hermitian: false,
            kind,
        }
    }

    /// Diagonal entries, used for diagonal preconditioning.
    pub fn diagonal_entries(&self) -> Vec<C64> {
        match &self.kind {
            Kind::Identity => vec![C64::new(1.0, 0.0); self.dim],
            Kind::Zero | Kind::Ladder { .. } => vec![ZERO; self.dim],
            Kind::Diagonal(d) => d.to_vec(),
            Kind::Sparse(c) => c.diagonal(),
            Kind::Kron { matter, fock } => {
                let fd = fock.diagonal_entries();
                let mut out = Vec::with_capacity(self.dim);
                for a in 0..matter.nrows() {
                    out.extend(fd.iter().map(|v| matter[(a, a)] * v));
                }
                out
            }
            Kind::Sum(ops) => {
                let mut out = ops[0].diagonal_entries();
                for op in &ops[1..] {
                    for (o, v) in out.iter_mut().zip(op.diagonal_entries()) {
                        *o += v;
                    }
                }
                out
            }
            Kind::Scaled(f, op) => op.diagonal_entries().into_iter().map(|v| f * v).collect(),
            Kind::Product(_) => self.to_csr().diagonal(),
        }
    }

    /// Explicit sparse form.
    pub fn to_csr(&self) -> Csr {
        let n = self.dim;
        match &self.kind {
            Kind::Identity => Csr::from_triplets(n, n, (0..n).map(|i| (i, i, C64::new(1.0, 0.0))).collect()),
            Kind::Zero => Csr::from_triplets(n, n, Vec::new()),
            Kind::Diagonal(d) => Csr::from_triplets(n, n, d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect()),
            Kind::Sparse(c) => (**c).clone(),
            Kind::Ladder {
                basis,
                coeffs,
                creation,
            } => Csr::from_triplets(n, n, ladder_triplets(basis, coeffs, *creation)),
            Kind::Kron { matter, fock } => {
                let f = fock.to_csr();
                let fd = fock.dim;
                let mut t = Vec::new();
                for a in 0..matter.nrows() {
                    for b in 0..matter.ncols() {
                        let m = matter[(a, b)];
                        if m == ZERO {
                            continue;
                        }
                        t.extend(f.triplets().into_iter().map(|(r, c, v)| (a * fd + r, b * fd + c, m * v)));
                    }
                }
                Csr::from_triplets(n, n, t)
            }
            Kind::Sum(ops) => {
                let t = ops.iter().flat_map(|o| o.to_csr().triplets()).collect();
                Csr::from_triplets(n, n, t)
            }
            Kind::Scaled(f, op) => {
                let t = op.to_csr().triplets().into_iter().map(|(r, c, v)| (r, c, f * v)).collect();
                Csr::from_triplets(n, n, t)
            }
            Kind::Product(ops) => {
                let mut acc = ops[0].to_csr();
                for op in &ops[1..] {
                    acc = acc.matmul(&op.to_csr());
                }
                acc
            }
        }
    }

    /// Replaces the structure by cached sparse storage.
    pub fn materialize(&self) -> LinOp {
        LinOp::sparse(self.to_csr(), self.hermitian)
    }

    /// Materializes when `dim <= threshold`, otherwise keeps the matrix-free form.
    pub fn cached(self, threshold: usize) -> LinOp {
        if self.dim <= threshold && !self.is_sparse() {
            self.materialize()
        } else {
            self
        }
    }

    /// `max |<u, A v> - <A u, v>| / (|A| |u| |v|)` over a few seeded random pairs,
    /// with `|A|` estimated from the same samples.
    pub fn hermiticity_defect(&self, seed: u64, samples: usize) -> f64 {
        let mut rng = linalg::seeded_rng(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let u = linalg::random_vector(&mut rng, self.dim);
            let v = linalg::random_vector(&mut rng, self.dim);
            let av = self.apply_vec(&v);
            let au = self.apply_vec(&u);
            let norm_est = (linalg::norm(&av) / linalg::norm(&v)).max(linalg::norm(&au) / linalg::norm(&u));
            let d = (linalg::dot(&u, &av) - linalg::dot(&au, &v)).norm();
            let scale = norm_est.max(f64::MIN_POSITIVE) * linalg::norm(&u) * linalg::norm(&v);
            worst = worst.max(d / scale);
        }
        worst
    }
}

fn kron_apply(matter: &DMatrix<C64>, fock: &LinOp, x: &[C64], y: &mut [C64], adjoint: bool) {
    let d = matter.nrows();
    let fd = fock.dim;
    let fx: Vec<Vec<C64>> = (0..d)
        .map(|b| {
            let xb = &x[b * fd..(b + 1) * fd];
            if matches!(fock.kind, Kind::Identity) {
                xb.to_vec()
            } else if adjoint {
                fock.adjoint_apply_vec(xb)
            } else {
                fock.apply_vec(xb)
            }
        })
        .collect();
    for a in 0..d {
        let ya = &mut y[a * fd..(a + 1) * fd];
        ya.fill(ZERO);
        for (b, fxb) in fx.iter().enumerate() {
            let m = if adjoint { matter[(b, a)].conj() } else { matter[(a, b)] };
            if m != ZERO {
                ya.par_iter_mut().zip(fxb.par_iter()).for_each(|(yi, v)| *yi += m * v);
            }
        }
    }
}

/// Gather form: each output state collects from its neighbours, so rows are
/// independent and the result does not depend on scheduling.
fn ladder_apply(basis: &FockBasis, coeffs: &[C64], creation: bool, x: &[C64], y: &mut [C64]) {
    let n_max = basis.n_max();
    y.par_iter_mut().enumerate().for_each_init(
        || Vec::with_capacity(basis.n_modes()),
        |buf: &mut Vec<u16>, (u, yu)| {
            let occ = basis.state(u);
            let mut s = ZERO;
            if creation {
                // (a*_i x)_u = sqrt(n_i(u)) x[u - e_i]
                for (i, &c) in coeffs.iter().enumerate() {
                    if c == ZERO || occ[i] == 0 {
                        continue;
                    }
                    buf.clear();
                    buf.extend_from_slice(occ);
                    buf[i] -= 1;
                    let src = basis.index(buf).expect("lowered state is in the basis");
                    s += c * (occ[i] as f64).sqrt() * x[src];
                }
            } else if basis.total(u) < n_max {
                // (a_i x)_u = sqrt(n_i(u) + 1) x[u + e_i]
                for (i, &c) in coeffs.iter().enumerate() {
                    if c == ZERO {
                        continue;
                    }
                    buf.clear();
                    buf.extend_from_slice(occ);
                    buf[i] += 1;
                    let src = basis.index(buf).expect("raised state is in the basis");
                    s += c * ((occ[i] as f64) + 1.0).sqrt() * x[src];
                }
            }
            *yu = s;
        },
    );
}

fn ladder_triplets(basis: &FockBasis, coeffs: &[C64], creation: bool) -> Vec<(usize, usize, C64)> {
    let mut t = Vec::new();
    let mut buf = Vec::with_capacity(basis.n_modes());
    for src in 0..basis.dim() {
        let occ = basis.state(src);
        for (i, &c) in coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            buf.clear();
            buf.extend_from_slice(occ);
            if creation {
                buf[i] += 1;
                if let Some(dst) = basis.index(&buf) {
                    t.push((dst, src, c * (buf[i] as f64).sqrt()));
                }
            } else if occ[i] > 0 {
                buf[i] -= 1;
                let dst = basis.index(&buf).expect("lowered state is in the basis");
                t.push((dst, src, c * (occ[i] as f64).sqrt()));
            }
        }
    }
    t
}
