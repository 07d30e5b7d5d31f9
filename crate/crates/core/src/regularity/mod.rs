//! Numerical checks of the pull-through formula, the boson-number moment
//! identities, the lower bound behind the absence of ground states, the
//! exact finite-mode decompositions of `N` and its factorial moments, and the
//! infrared sweep harness.
//!
//! At finite truncation a ground state always exists. The absence checks
//! therefore verify the inequality used in the proof and, through sweeps,
//! the divergence of its right-hand side as the infrared cutoff shrinks.

mod appendix;
mod identities;
mod sweep;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use appendix::{ccr_and_bound_suite, factorial_moment_decomposition, number_decomposition};
pub use identities::{
    absence_lower_bound, higher_moment_identity, higher_moment_summand, moment_identity, pullthrough_check,
};
pub use sweep::{ir_sweep, IrFit, IrSweep, IrSweepRow, IrVerdict, ModelTemplate, SweepOptions};

use crate::error::{GsbError, Result};
use crate::model::GsbModel;
use crate::spectral::GroundState;

/// Tolerance for identities that hold exactly on the truncated space.
pub const EXACT_TOL: f64 = 1e-12;
/// Default slack for the absence inequality.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Largest ground-state residual accepted by resolvent-mediated checks.
pub const GROUND_RESIDUAL_MAX: f64 = 1e-10;

/// Tolerance for identities that go through shifted resolvents: the top layer
/// and the linear solver are the two error sources.
pub fn resolvent_tol(w_top: f64, cg_tol: f64) -> f64 {
    (10.0 * w_top.sqrt() + 100.0 * cg_tol).max(1e-7)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `lhs = rhs`
    Identity,
    /// `lhs >= rhs`
    Inequality,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n_modes: usize,
    pub n_max: usize,
    pub matter_dim: usize,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub nu: Option<u32>,
    pub ir_cutoff: Option<f64>,
    /// Worker threads of the pool the check ran in.
    pub threads: Option<usize>,
}

impl ReportMetadata {
    pub fn for_model(model: &GsbModel) -> Self {
        ReportMetadata {
            n_modes: model.n_modes(),
            n_max: model.n_max,
            matter_dim: model.matter_dim(),
            alpha: Some(model.alpha),
            seed: None,
            nu: Some(model.grid.nu),
            ir_cutoff: Some(model.grid.ir_cutoff),
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub check_name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub w_top: f64,
    pub tol_used: f64,
    pub pass: bool,
    pub metadata: ReportMetadata,
    /// Solver statistics and check-specific diagnostics.
    pub stats: BTreeMap<String, f64>,
    /// Relative residual of each per-mode resolvent solve, when the check uses them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mode_residuals: Vec<f64>,
    pub note: Option<String>,
}

impl RegularityReport {
    /// Equality report; `abs_err = |lhs - rhs|`.
    pub fn identity(name: &str, lhs: f64, rhs: f64, w_top: f64, tol: f64, metadata: ReportMetadata) -> Self {
        let abs_err = (lhs - rhs).abs();
        let rel_err = abs_err / lhs.abs().max(rhs.abs()).max(1e-300);
        Self::build(name, CheckKind::Identity, lhs, rhs, abs_err, rel_err, w_top, tol, metadata)
    }

    /// Equality report with an externally measured discrepancy.
    #[allow(clippy::too_many_arguments)]
    pub fn discrepancy(
        name: &str,
        lhs: f64,
        rhs: f64,
        abs_err: f64,
        rel_err: f64,
        w_top: f64,
        tol: f64,
        metadata: ReportMetadata,
    ) -> Self {
        Self::build(name, CheckKind::Identity, lhs, rhs, abs_err, rel_err, w_top, tol, metadata)
    }

    /// `lhs >= rhs` report; the error is the amount by which `rhs` exceeds `lhs`.
    pub fn inequality(name: &str, lhs: f64, rhs: f64, w_top: f64, tol: f64, metadata: ReportMetadata) -> Self {
        let abs_err = (rhs - lhs).max(0.0);
        let rel_err = abs_err / scale(lhs, rhs);
        let mut r = Self::build(name, CheckKind::Inequality, lhs, rhs, abs_err, rel_err, w_top, tol, metadata);
        r.stats.insert("margin".into(), lhs - rhs);
        r
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        name: &str,
        kind: CheckKind,
        lhs: f64,
        rhs: f64,
        abs_err: f64,
        rel_err: f64,
        w_top: f64,
        tol: f64,
        metadata: ReportMetadata,
    ) -> Self {
        let pass = match kind {
            CheckKind::Identity => rel_err <= tol || abs_err <= tol * scale(lhs, rhs),
            CheckKind::Inequality => lhs >= rhs - tol * scale(lhs, rhs),
        };
        RegularityReport {
            check_name: name.to_string(),
            kind,
            lhs,
            rhs,
            abs_err,
            rel_err,
            w_top,
            tol_used: tol,
            pass,
            metadata,
            stats: BTreeMap::new(),
            mode_residuals: Vec::new(),
            note: None,
        }
    }

    pub fn with_stat(mut self, key: &str, value: f64) -> Self {
        self.stats.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

fn scale(lhs: f64, rhs: f64) -> f64 {
    lhs.abs().max(rhs.abs()).max(1.0)
}

fn require_ground_state(model: &GsbModel, gs: &GroundState) -> Result<f64> {
    if gs.vector.len() != model.dim() {
        return Err(GsbError::DimensionMismatch(format!(
            "ground state has length {} for model dimension {}",
            gs.vector.len(),
            model.dim()
        )));
    }
    let required = GROUND_RESIDUAL_MAX * gs.energy.abs().max(1.0);
    if !(gs.residual <= required) {
        return Err(GsbError::GroundStateResidual {
            residual: gs.residual,
            required,
        });
    }
    Ok(gs.w_top.unwrap_or_else(|| model.top_weight(&gs.vector)))
}
