//! Truncated bosonic Fock space and its second-quantized operators.
//!
//! Every operator acts as `P * Op * P` where `P` projects onto states with at
//! most `n_max` quanta. Annihilators are unaffected by the projection;
//! creators vanish on the top layer, which is the only place the canonical
//! commutation relations fail.

mod basis;
mod csr;
mod op;

use std::sync::Arc;

use nalgebra::DMatrix;

pub use basis::{fock_dimension, FockBasis, DEFAULT_MAX_DIM};
pub use csr::Csr;
pub use op::{LinOp, DEFAULT_SPARSE_THRESHOLD};

use crate::error::{GsbError, Result};
use crate::linalg::{self, C64};
use crate::modes::ModeSet;

fn unit_coeffs(n_modes: usize, i: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); n_modes];
    c[i] = C64::new(1.0, 0.0);
    c
}

fn check_mode(basis: &FockBasis, i: usize) -> Result<()> {
    if i >= basis.n_modes() {
        return Err(GsbError::InvalidArgument(format!(
            "mode index {i} out of range ({} modes)",
            basis.n_modes()
        )));
    }
    Ok(())
}

fn check_column(basis: &FockBasis, len: usize) -> Result<()> {
    if len != basis.n_modes() {
        return Err(GsbError::DimensionMismatch(format!(
            "column has {len} entries for {} modes",
            basis.n_modes()
        )));
    }
    Ok(())
}

/// `a_i |.., n_i, ..> = sqrt(n_i) |.., n_i - 1, ..>`
pub fn annihilator(i: usize, basis: &Arc<FockBasis>) -> Result<LinOp> {
    check_mode(basis, i)?;
    Ok(LinOp::ladder(basis.clone(), unit_coeffs(basis.n_modes(), i), false))
}

/// `P a*_i P`; zero on the top layer.
pub fn creator(i: usize, basis: &Arc<FockBasis>) -> Result<LinOp> {
    check_mode(basis, i)?;
    Ok(LinOp::ladder(basis.clone(), unit_coeffs(basis.n_modes(), i), true))
}

/// `a(f) = sum_i conj(f(r_i)) sqrt(w_i) a_i`, anti-linear in `f`.
pub fn smeared_annihilator(f: &[C64], grid: &ModeSet, basis: &Arc<FockBasis>) -> Result<LinOp> {
    check_column(basis, f.len())?;
    check_column(basis, grid.len())?;
    let coeffs = f
        .iter()
        .zip(&grid.weights)
        .map(|(v, w)| v.conj() * w.sqrt())
        .collect();
    Ok(LinOp::ladder(basis.clone(), coeffs, false))
}

/// `a*(f) = sum_i f(r_i) sqrt(w_i) a*_i`, linear in `f`.
pub fn smeared_creator(f: &[C64], grid: &ModeSet, basis: &Arc<FockBasis>) -> Result<LinOp> {
    check_column(basis, f.len())?;
    check_column(basis, grid.len())?;
    let coeffs = f.iter().zip(&grid.weights).map(|(v, w)| v * w.sqrt()).collect();
    Ok(LinOp::ladder(basis.clone(), coeffs, true))
}

/// Eigenvalue of `dΓ(g)` on each basis state: `sum_i g_i n_i`.
pub fn dgamma_diagonal(g: &[f64], basis: &FockBasis) -> Result<Vec<f64>> {
    check_column(basis, g.len())?;
    Ok(basis
        .states()
        .map(|s| s.iter().zip(g).map(|(&n, gi)| n as f64 * gi).sum())
        .collect())
}

/// Second quantization of the multiplication operator `g`.
pub fn dgamma(g: &[f64], basis: &FockBasis) -> Result<LinOp> {
    let d = dgamma_diagonal(g, basis)?;
    Ok(LinOp::diagonal(d.into_iter().map(|v| C64::new(v, 0.0)).collect()))
}

/// Number operator `N = dΓ(1)`.
pub fn number(basis: &FockBasis) -> LinOp {
    dgamma(&vec![1.0; basis.n_modes()], basis).expect("column length matches")
}

/// Field operator `(a*(lam) + a(lam)) / sqrt(2)` for a real coupling column.
pub fn field(lam: &[f64], grid: &ModeSet, basis: &Arc<FockBasis>) -> Result<LinOp> {
    let f: Vec<C64> = lam.iter().map(|&v| C64::new(v, 0.0)).collect();
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let op = LinOp::sum(vec![smeared_creator(&f, grid, basis)?, smeared_annihilator(&f, grid, basis)?]);
    Ok(op.scaled(s).assume_hermitian())
}

/// `matter ⊗ fock` on `H ⊗ F` (matter index major).
pub fn tensor(matter: DMatrix<C64>, fock: LinOp) -> LinOp {
    LinOp::kron(matter, fock)
}

/// `A ⊗ 1`
pub fn matter_only(matter: DMatrix<C64>, fock_dim: usize) -> LinOp {
    LinOp::kron(matter, LinOp::identity(fock_dim))
}

/// `1 ⊗ X`
pub fn fock_only(matter_dim: usize, fock: LinOp) -> LinOp {
    LinOp::kron(DMatrix::identity(matter_dim, matter_dim), fock)
}

/// Amplitudes on `H ⊗ F_trunc`, matter index major.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub matter_dim: usize,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(matter_dim: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if matter_dim == 0 || amplitudes.len() % matter_dim != 0 {
            return Err(GsbError::DimensionMismatch(format!(
                "{} amplitudes do not split into {matter_dim} matter blocks",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GsbError::InvalidArgument("state has non-finite amplitudes".into()));
        }
        Ok(StateVector {
            matter_dim,
            amplitudes,
        })
    }

    /// `v ⊗ w`
    pub fn product(matter: &[C64], fock: &[C64]) -> Self {
        let amplitudes = matter
            .iter()
            .flat_map(|a| fock.iter().map(move |b| a * b))
            .collect();
        StateVector {
            matter_dim: matter.len(),
            amplitudes,
        }
    }

    pub fn vacuum(matter: &[C64], basis: &FockBasis) -> Self {
        let mut fock = vec![C64::new(0.0, 0.0); basis.dim()];
        fock[0] = C64::new(1.0, 0.0);
        Self::product(matter, &fock)
    }

    pub fn fock_dim(&self) -> usize {
        self.amplitudes.len() / self.matter_dim
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    /// Weight on the maximal-quanta layer.
    pub fn top_weight(&self, basis: &FockBasis) -> f64 {
        top_weight(&self.amplitudes, basis)
    }
}

/// `sum |psi|^2` over states with exactly `n_max` quanta, all matter blocks.
pub fn top_weight(amps: &[C64], basis: &FockBasis) -> f64 {
    let fd = basis.dim();
    let top = basis.top_layer();
    amps.chunks(fd)
        .map(|blk| blk[top.clone()].iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum()
}

/// Zeroes the top layer of every matter block.
pub fn drop_top_layer(amps: &mut [C64], basis: &FockBasis) {
    let fd = basis.dim();
    let top = basis.top_layer();
    for blk in amps.chunks_mut(fd) {
        blk[top.clone()].fill(C64::new(0.0, 0.0));
    }
}

#[cfg(test)]
mod tests;
