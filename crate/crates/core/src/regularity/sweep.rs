use log::info;
use serde::{Deserialize, Serialize};

use super::absence_lower_bound;
use crate::error::{GsbError, Result};
use crate::fock::{DEFAULT_MAX_DIM, DEFAULT_SPARSE_THRESHOLD};
use crate::model::{AssembleOptions, GsbModel, MatterPreset};
use crate::modes::{self, build_radial_grid, CouplingFamily, DispersionLaw, IrClass, QuadratureRule};
use crate::spectral::SolverConfig;

/// Everything about a sweep model except the infrared cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelTemplate {
    pub matter: MatterPreset,
    pub nu: u32,
    /// Upper edge of the radial grid.
    pub uv_cutoff: f64,
    pub dispersion: DispersionLaw,
    pub n_max: usize,
    pub max_dim: usize,
}

impl ModelTemplate {
    pub fn new(matter: MatterPreset, nu: u32, uv_cutoff: f64, n_max: usize) -> Self {
        ModelTemplate {
            matter,
            nu,
            uv_cutoff,
            dispersion: DispersionLaw::Massless,
            n_max,
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    /// Log-midpoint grid on `[sigma, uv_cutoff]` with every channel coupled through `family`.
    pub fn build(&self, family: &CouplingFamily, sigma: f64, n_shells: usize, alpha: f64) -> Result<GsbModel> {
        let mut grid = build_radial_grid(self.nu, sigma, self.uv_cutoff, n_shells, QuadratureRule::LogMidpoint)?
            .with_dispersion(self.dispersion);
        for _ in 0..self.matter.n_channels() {
            grid.push_family(*family)?;
        }
        let (a, b) = self.matter.matrices()?;
        GsbModel::assemble_with(
            a,
            b,
            grid,
            alpha,
            self.n_max,
            AssembleOptions {
                max_dim: self.max_dim,
                sparse_threshold: DEFAULT_SPARSE_THRESHOLD,
            },
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Final increment of `<N>` allowed for a converging verdict, relative to `<N>`.
    pub cauchy_tol: f64,
    /// Minimum coefficient of determination for a diverging verdict.
    pub r2_min: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            cauchy_tol: 1e-3,
            r2_min: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrSweepRow {
    pub sigma: f64,
    pub n_shells: usize,
    pub dim: usize,
    pub energy: f64,
    pub residual: f64,
    pub expectation_n: f64,
    pub absence_bound: f64,
    /// Discrete `|λ/ω|²` of channel 0.
    pub lam_over_w_norm: f64,
    /// `α² |λ/ω|² / 2`, the exact `<N>` of the untruncated van Hove model.
    pub closed_form_n: Option<f64>,
    pub w_top: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrVerdict {
    Diverging,
    Converging,
    Inconclusive,
}

/// Least-squares fits of `<N>` against `x = ln(1/σ)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IrFit {
    /// `<N> ≈ log_intercept + log_slope · x`
    pub log_intercept: f64,
    pub log_slope: f64,
    pub log_r2: f64,
    /// `ln <N> ≈ c + power_slope · x`, when every `<N>` is positive.
    pub power_slope: Option<f64>,
    pub power_r2: Option<f64>,
    /// `<N>(σ_{k+1}) - <N>(σ_k)`
    pub increments: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrSweep {
    pub rows: Vec<IrSweepRow>,
    pub fit: IrFit,
    pub verdict: IrVerdict,
    pub expected: IrClass,
    pub agrees: bool,
    /// Set when a solve failed; `rows` then holds the cutoffs completed before it.
    pub aborted: Option<String>,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 0.0 };
    (intercept, slope, r2)
}

fn classify(rows: &[IrSweepRow], opts: &SweepOptions) -> (IrFit, IrVerdict) {
    let x: Vec<f64> = rows.iter().map(|r| (1.0 / r.sigma).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.expectation_n).collect();
    let increments: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let mut fit = IrFit {
        increments: increments.clone(),
        ..IrFit::default()
    };
    if rows.len() < 2 {
        return (fit, IrVerdict::Inconclusive);
    }
    let (a, b, r2) = linear_fit(&x, &y);
    fit.log_intercept = a;
    fit.log_slope = b;
    fit.log_r2 = r2;
    if y.iter().all(|v| *v > 0.0) {
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let (_, s, r2p) = linear_fit(&x, &ly);
        fit.power_slope = Some(s);
        fit.power_r2 = Some(r2p);
    }

    let last = *increments.last().expect("two rows");
    let shrinking = increments.windows(2).all(|w| w[1].abs() <= w[0].abs());
    if shrinking && last.abs() <= opts.cauchy_tol * y[y.len() - 1].abs() {
        return (fit, IrVerdict::Converging);
    }
    let growing = increments.iter().all(|d| *d > 0.0);
    let log_ok = b > 0.0 && r2 >= opts.r2_min;
    let power_ok = fit.power_slope.is_some_and(|s| s > 0.0) && fit.power_r2.is_some_and(|r| r >= opts.r2_min);
    if rows.len() >= 3 && growing && (log_ok || power_ok) {
        return (fit, IrVerdict::Diverging);
    }
    (fit, IrVerdict::Inconclusive)
}

/// Solves one model per infrared cutoff and classifies how `<N>` behaves as
/// the cutoff shrinks.
///
/// Grids are log-midpoint with `shells_per_decade` shells per decade of
/// `[σ, uv_cutoff]`. The expected class is the analytic one for massless
/// dispersion; a massive dispersion is always infrared regular.
pub fn ir_sweep(
    family: &CouplingFamily,
    template: &ModelTemplate,
    sigmas: &[f64],
    shells_per_decade: usize,
    alpha: f64,
    cfg: &SolverConfig,
    opts: &SweepOptions,
) -> Result<IrSweep> {
    if sigmas.is_empty() {
        return Err(GsbError::InvalidArgument("sigma list is empty".into()));
    }
    if sigmas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(GsbError::InvalidArgument("sigmas must be strictly decreasing".into()));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && **s < template.uv_cutoff)) {
        return Err(GsbError::InvalidArgument(format!(
            "sigma {s} must lie in (0, {})",
            template.uv_cutoff
        )));
    }
    if shells_per_decade == 0 {
        return Err(GsbError::InvalidArgument("shells_per_decade must be >= 1".into()));
    }
    family.validate()?;
    let expected = match template.dispersion {
        DispersionLaw::Massless => modes::ir_class(template.nu, family.p),
        DispersionLaw::Massive(m) if m > 0.0 => IrClass::Regular,
        DispersionLaw::Massive(_) => modes::ir_class(template.nu, family.p),
    };

    let mut rows = Vec::with_capacity(sigmas.len());
    let mut aborted = None;
    for &sigma in sigmas {
        let decades = (template.uv_cutoff / sigma).log10();
        let n_shells = ((shells_per_decade as f64 * decades).round() as usize).max(1);
        match sweep_row(family, template, sigma, n_shells, alpha, cfg) {
            Ok(row) => {
                info!("sigma {sigma:.3e}: {n_shells} shells, <N> = {:.10e}", row.expectation_n);
                rows.push(row);
            }
            Err(e) => {
                aborted = Some(format!("sigma {sigma}: {e}"));
                break;
            }
        }
    }
    let (fit, verdict) = if aborted.is_some() {
        (classify(&rows, opts).0, IrVerdict::Inconclusive)
    } else {
        classify(&rows, opts)
    };
    let agrees = matches!(
        (verdict, expected),
        (IrVerdict::Diverging, IrClass::Singular) | (IrVerdict::Converging, IrClass::Regular)
    );
    Ok(IrSweep {
        rows,
        fit,
        verdict,
        expected,
        agrees,
        aborted,
    })
}

fn sweep_row(
    family: &CouplingFamily,
    template: &ModelTemplate,
    sigma: f64,
    n_shells: usize,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<IrSweepRow> {
    let model = template.build(family, sigma, n_shells, alpha)?;
    let gs = model.ground_state(cfg)?;
    let bound = absence_lower_bound(&model, &gs, &vec![1.0; model.n_modes()], None)?;
    let lam_over_w_norm = modes::l2_criteria(&model.grid, 0)?.norm_lam_over_w;
    Ok(IrSweepRow {
        sigma,
        n_shells,
        dim: model.dim(),
        energy: gs.energy,
        residual: gs.residual,
        expectation_n: bound.lhs,
        absence_bound: bound.rhs,
        lam_over_w_norm,
        closed_form_n: template
            .matter
            .is_van_hove()
            .then(|| alpha * alpha * lam_over_w_norm / 2.0),
        w_top: bound.w_top,
    })
}
