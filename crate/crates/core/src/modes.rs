//! Radial quadrature grids for rotation-invariant mode sets.
//!
//! Mode `i` stands for the normalized indicator of a radial shell: a smeared
//! one-particle function `f` enters second-quantized operators through the
//! coefficient `f(r_i) * sqrt(w_i)`, so discrete sums `sum_i w_i g(r_i)`
//! approximate the corresponding integrals over momentum space.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{GsbError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Equal-width shells, nodes at the shell centres.
    Midpoint,
    /// Geometrically growing shells, nodes at the geometric shell centres.
    LogMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionLaw {
    Massless,
    Massive(f64),
}

impl DispersionLaw {
    pub fn omega(&self, r: f64) -> f64 {
        match *self {
            DispersionLaw::Massless => r,
            DispersionLaw::Massive(m) => (r * r + m * m).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `exp(-(r / uv)^2)`
    Gaussian,
    /// indicator of `r <= uv`
    HardCutoff,
}

/// `lambda(r) = rho0 * r^p * envelope(r) / sqrt(omega(r))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFamily {
    pub rho0: f64,
    pub p: f64,
    pub uv: f64,
    pub profile: Envelope,
}

impl CouplingFamily {
    pub fn rho(&self, r: f64) -> f64 {
        let env = match self.profile {
            Envelope::Gaussian => (-(r / self.uv).powi(2)).exp(),
            Envelope::HardCutoff => {
                if r <= self.uv {
                    1.0
                } else {
                    0.0
                }
            }
        };
        self.rho0 * r.powf(self.p) * env
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 >= 0.0) || !self.rho0.is_finite() {
            return Err(GsbError::InvalidArgument(format!(
                "coupling amplitude rho0 must be finite and >= 0, got {}",
                self.rho0
            )));
        }
        if !self.p.is_finite() || !(self.uv > 0.0) || !self.uv.is_finite() {
            return Err(GsbError::InvalidArgument(format!(
                "coupling exponent and uv cutoff must be finite with uv > 0 (p={}, uv={})",
                self.p, self.uv
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrClass {
    Regular,
    Singular,
}

/// Infrared class of `lambda / omega` for `lambda = rho / sqrt(omega)`,
/// `omega = |k|` and `rho ~ |k|^p` near the origin of `R^nu`:
/// `int_0 r^(2p - 3) r^(nu - 1) dr` diverges exactly when `2p <= 3 - nu`.
pub fn ir_class(nu: u32, p: f64) -> IrClass {
    if 2.0 * p <= 3.0 - nu as f64 {
        IrClass::Singular
    } else {
        IrClass::Regular
    }
}

/// Area of the unit sphere in `R^nu` (2 for `nu = 1`).
pub fn surface_area(nu: u32) -> f64 {
    match nu {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => 2.0 * PI / (n - 2) as f64 * surface_area(n - 2),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub values: Vec<f64>,
    pub family: Option<CouplingFamily>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub nu: u32,
    pub ir_cutoff: f64,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub omega: Vec<f64>,
    pub channels: Vec<Channel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Criteria {
    pub norm_lam: f64,
    pub norm_lam_over_sqrtw: f64,
    pub norm_lam_over_w: f64,
    pub ir_class: Option<IrClass>,
}

pub fn build_radial_grid(
    nu: u32,
    sigma: f64,
    uv_cutoff: f64,
    n_shells: usize,
    rule: QuadratureRule,
) -> Result<ModeSet> {
    if nu == 0 {
        return Err(GsbError::InvalidGrid("spatial dimension must be >= 1".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(GsbError::InvalidGrid(format!(
            "infrared cutoff must be > 0 (omega = 0 modes are excluded), got {sigma}"
        )));
    }
    if !(uv_cutoff > sigma) || !uv_cutoff.is_finite() {
        return Err(GsbError::InvalidGrid(format!(
            "uv cutoff {uv_cutoff} must exceed the infrared cutoff {sigma}"
        )));
    }
    if n_shells == 0 {
        return Err(GsbError::InvalidGrid("n_shells must be >= 1".into()));
    }
    let surface = surface_area(nu);
    let (points, widths): (Vec<f64>, Vec<f64>) = match rule {
        QuadratureRule::Midpoint => {
            let dr = (uv_cutoff - sigma) / n_shells as f64;
            (0..n_shells)
                .map(|i| (sigma + (i as f64 + 0.5) * dr, dr))
                .unzip()
        }
        QuadratureRule::LogMidpoint => {
            let ratio = uv_cutoff / sigma;
            let edge = |k: usize| sigma * ratio.powf(k as f64 / n_shells as f64);
            (0..n_shells)
                .map(|i| {
                    let (lo, hi) = (edge(i), edge(i + 1));
                    ((lo * hi).sqrt(), hi - lo)
                })
                .unzip()
        }
    };
    let weights = points
        .iter()
        .zip(&widths)
        .map(|(&r, &dr)| surface * r.powi(nu as i32 - 1) * dr)
        .collect();
    let omega = points.clone();
    ModeSet::new(nu, sigma, points, weights, omega)
}

impl ModeSet {
    /// Mode set from explicit nodes, cell measures and dispersion values.
    pub fn new(
        nu: u32,
        ir_cutoff: f64,
        points: Vec<f64>,
        weights: Vec<f64>,
        omega: Vec<f64>,
    ) -> Result<Self> {
        let grid = ModeSet {
            nu,
            ir_cutoff,
            points,
            weights,
            omega,
            channels: Vec::new(),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.points.len();
        if m == 0 {
            return Err(GsbError::InvalidGrid("mode set is empty".into()));
        }
        if self.weights.len() != m || self.omega.len() != m {
            return Err(GsbError::InvalidGrid(format!(
                "points/weights/omega lengths differ ({m}/{}/{})",
                self.weights.len(),
                self.omega.len()
            )));
        }
        if self.points.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(GsbError::InvalidGrid("points must be strictly increasing".into()));
        }
        if self.weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(GsbError::InvalidGrid("all weights must be finite and > 0".into()));
        }
        if self.omega.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(GsbError::InvalidGrid("all dispersion values must be finite and > 0".into()));
        }
        for (j, ch) in self.channels.iter().enumerate() {
            if ch.values.len() != m {
                return Err(GsbError::InvalidGrid(format!(
                    "coupling channel {j} has {} values for {m} modes",
                    ch.values.len()
                )));
            }
            if ch.values.iter().any(|v| !v.is_finite()) {
                return Err(GsbError::InvalidGrid(format!("coupling channel {j} is not finite")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn with_dispersion(mut self, law: DispersionLaw) -> Self {
        self.omega = self.points.iter().map(|&r| law.omega(r)).collect();
        self
    }

    /// Appends a coupling channel evaluated from `family` with the grid's own dispersion.
    pub fn push_family(&mut self, family: CouplingFamily) -> Result<()> {
        family.validate()?;
        if !(family.uv > self.ir_cutoff) {
            return Err(GsbError::InvalidArgument(format!(
                "coupling uv cutoff {} must exceed the grid infrared cutoff {}",
                family.uv, self.ir_cutoff
            )));
        }
        let values = self
            .points
            .iter()
            .zip(&self.omega)
            .map(|(&r, &w)| family.rho(r) / w.sqrt())
            .collect();
        self.channels.push(Channel {
            values,
            family: Some(family),
        });
        Ok(())
    }

    pub fn push_values(&mut self, values: Vec<f64>) -> Result<()> {
        self.channels.push(Channel {
            values,
            family: None,
        });
        self.validate()
    }

    pub fn lambda(&self, channel: usize) -> &[f64] {
        &self.channels[channel].values
    }

    /// `sum_i w_i |f_i|^2`
    pub fn discrete_norm_sqr(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v * v).sum()
    }
}

/// Coupling column `rho(r_i) / sqrt(omega_i)` under the given dispersion law.
pub fn eval_coupling(family: &CouplingFamily, grid: &ModeSet, law: DispersionLaw) -> Vec<f64> {
    grid.points
        .iter()
        .map(|&r| family.rho(r) / law.omega(r).sqrt())
        .collect()
}

pub fn l2_criteria(grid: &ModeSet, channel: usize) -> Result<L2Criteria> {
    let ch = grid.channels.get(channel).ok_or_else(|| {
        GsbError::InvalidArgument(format!(
            "channel {channel} out of range ({} channels)",
            grid.n_channels()
        ))
    })?;
    let sum = |s: f64| -> f64 {
        ch.values
            .iter()
            .zip(&grid.weights)
            .zip(&grid.omega)
            .map(|((l, w), o)| w * (l / o.powf(s)).powi(2))
            .sum()
    };
    Ok(L2Criteria {
        norm_lam: sum(0.0),
        norm_lam_over_sqrtw: sum(0.5),
        norm_lam_over_w: sum(1.0),
        ir_class: ch.family.map(|f| ir_class(grid.nu, f.p)),
    })
}
