//! Ground-state eigensolver and shifted-resolvent solver.
//!
//! Both work from `LinOp::apply` alone, so they run unchanged on cached
//! sparse operators and on matrix-free ones.

mod eigen;
mod resolvent;

use serde::{Deserialize, Serialize};

pub use eigen::{ground_state, GroundState};
pub use resolvent::{batched_resolvent, resolvent_apply, Resolvent, Solve};

use crate::error::{GsbError, Result};

/// How the subspace is expanded in the eigensolver and how CG is preconditioned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    /// Plain residual expansion: thick-restart Lanczos with full
    /// reorthogonalization; unpreconditioned CG.
    None,
    /// Diagonal scaling: residuals are scaled by `(diag(H) - theta)^-1`
    /// (Olsen-corrected Davidson) and CG uses a Jacobi preconditioner.
    Diagonal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub eig_tol: f64,
    pub max_lanczos: usize,
    /// Subspace size at which the eigensolver restarts.
    pub max_basis: usize,
    pub cg_tol: f64,
    pub cg_max: usize,
    pub seed: u64,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eig_tol: 1e-11,
            max_lanczos: 5000,
            max_basis: 64,
            cg_tol: 1e-11,
            cg_max: 20_000,
            seed: 0,
            preconditioner: Preconditioner::Diagonal,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eig_tol", self.eig_tol), ("cg_tol", self.cg_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(GsbError::InvalidArgument(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_lanczos == 0 || self.cg_max == 0 {
            return Err(GsbError::InvalidArgument("iteration caps must be >= 1".into()));
        }
        if self.max_basis < 4 {
            return Err(GsbError::InvalidArgument("max_basis must be >= 4".into()));
        }
        Ok(())
    }
}
