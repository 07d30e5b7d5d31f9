//! Run configuration: parsing, validation and resolution of defaults.

use std::path::{Path, PathBuf};

use gsb_core::fock::{fock_dimension, DEFAULT_MAX_DIM};
use gsb_core::model::MatterPreset;
use gsb_core::modes::{
    build_radial_grid, CouplingFamily, DispersionLaw, ModeSet, QuadratureRule,
};
use gsb_core::regularity::INEQUALITY_TOL;
use gsb_core::spectral::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable that replaces `max_dim` after parsing.
pub const MAX_DIM_ENV: &str = "GSB_MAX_DIM";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: MatterPreset,
    pub grid: GridSpec,
    /// One family shared by every channel, or one per channel. Radial grids only.
    #[serde(default)]
    pub coupling: Vec<CouplingFamily>,
    #[serde(default = "massless")]
    pub dispersion: DispersionLaw,
    pub alpha: f64,
    pub n_max: usize,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Seed of every random draw made by the checks.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; resolved to the hardware count when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Largest Fock basis the run may allocate.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

fn massless() -> DispersionLaw {
    DispersionLaw::Massless
}

fn default_output() -> PathBuf {
    PathBuf::from("gsb_out")
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// Shells of `[sigma, Lambda]` in `R^nu`.
    Radial {
        nu: u32,
        sigma: f64,
        #[serde(rename = "Lambda")]
        uv: f64,
        n_shells: usize,
        #[serde(default = "log_midpoint")]
        rule: QuadratureRule,
    },
    /// Modes given point by point; `lambda[j]` is channel `j`.
    Explicit {
        #[serde(default = "default_nu")]
        nu: u32,
        points: Vec<f64>,
        weights: Vec<f64>,
        omega: Vec<f64>,
        lambda: Vec<Vec<f64>>,
    },
}

fn log_midpoint() -> QuadratureRule {
    QuadratureRule::LogMidpoint
}

fn default_nu() -> u32 {
    3
}

/// A real function on the mode set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeFunction {
    Constant { value: f64 },
    /// `omega^exponent`
    OmegaPower { exponent: f64 },
    /// The coupling values of one channel.
    Coupling { channel: usize },
    /// Indicator of one mode.
    Mode { index: usize },
    Values { values: Vec<f64> },
}

impl ModeFunction {
    pub fn evaluate(&self, grid: &ModeSet) -> Vec<f64> {
        let m = grid.len();
        match self {
            ModeFunction::Constant { value } => vec![*value; m],
            ModeFunction::OmegaPower { exponent } => grid.omega.iter().map(|w| w.powf(*exponent)).collect(),
            ModeFunction::Coupling { channel } => grid.lambda(*channel).to_vec(),
            ModeFunction::Mode { index } => (0..m).map(|i| if i == *index { 1.0 } else { 0.0 }).collect(),
            ModeFunction::Values { values } => values.clone(),
        }
    }

    /// Short tag used in report names.
    pub fn label(&self) -> String {
        match self {
            ModeFunction::Constant { value } => format!("const {value}"),
            ModeFunction::OmegaPower { exponent } => format!("omega^{exponent}"),
            ModeFunction::Coupling { channel } => format!("lambda_{channel}"),
            ModeFunction::Mode { index } => format!("mode {index}"),
            ModeFunction::Values { .. } => "values".into(),
        }
    }

    fn validate(&self, path: &str, n_modes: usize, n_channels: usize) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(format!("{path}: {msg}")));
        match self {
            ModeFunction::Constant { value } if !value.is_finite() => bad("value must be finite".into()),
            ModeFunction::OmegaPower { exponent } if !exponent.is_finite() => bad("exponent must be finite".into()),
            ModeFunction::Coupling { channel } if *channel >= n_channels => {
                bad(format!("channel {channel} out of range ({n_channels} channels)"))
            }
            ModeFunction::Mode { index } if *index >= n_modes => bad(format!("mode {index} out of range ({n_modes} modes)")),
            ModeFunction::Values { values } if values.len() != n_modes => {
                bad(format!("{} values for {n_modes} modes", values.len()))
            }
            ModeFunction::Values { values } if values.iter().any(|v| !v.is_finite()) => bad("values must be finite".into()),
            _ => Ok(()),
        }
    }

    fn nonnegative(&self, path: &str, n_modes: usize) -> Result<(), CliError> {
        let ok = match self {
            ModeFunction::Constant { value } => *value >= 0.0,
            ModeFunction::OmegaPower { .. } | ModeFunction::Mode { .. } => true,
            ModeFunction::Coupling { .. } => true,
            ModeFunction::Values { values } => values.len() == n_modes && values.iter().all(|v| *v >= 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!("{path}: must be nonnegative")))
        }
    }
}

fn lambda0() -> ModeFunction {
    ModeFunction::Coupling { channel: 0 }
}

fn unit() -> ModeFunction {
    ModeFunction::Constant { value: 1.0 }
}

fn omega() -> ModeFunction {
    ModeFunction::OmegaPower { exponent: 1.0 }
}

fn inequality_tol() -> f64 {
    INEQUALITY_TOL
}

fn default_states() -> usize {
    10
}

fn default_order() -> usize {
    2
}

fn default_shells() -> usize {
    16
}

fn default_cauchy() -> f64 {
    1e-3
}

fn default_r2() -> f64 {
    0.99
}

fn default_closed_form_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Pullthrough {
        #[serde(default = "lambda0")]
        f: ModeFunction,
    },
    Moment {
        #[serde(default = "unit")]
        g: ModeFunction,
    },
    Absence {
        #[serde(default = "unit")]
        g: ModeFunction,
        #[serde(default = "inequality_tol")]
        tol: f64,
    },
    Higher {
        n: usize,
    },
    /// Exact decompositions on seeded random states of the model's space.
    Appendix {
        #[serde(default = "default_states")]
        states: usize,
        #[serde(default = "omega")]
        k: ModeFunction,
        #[serde(default = "default_order")]
        max_order: usize,
    },
    Ccr {},
    IrSweep {
        sigmas: Vec<f64>,
        #[serde(default = "default_shells")]
        shells_per_decade: usize,
        #[serde(default = "default_cauchy")]
        cauchy_tol: f64,
        #[serde(default = "default_r2")]
        r2_min: f64,
        /// Relative tolerance against the closed form (van Hove only).
        #[serde(default = "default_closed_form_tol")]
        closed_form_tol: f64,
    },
}

/// Check kinds addressable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum CheckName {
    Pullthrough,
    Moment,
    Absence,
    Higher,
    Appendix,
    Ccr,
    IrSweep,
}

impl CheckSpec {
    pub fn name(&self) -> CheckName {
        match self {
            CheckSpec::Pullthrough { .. } => CheckName::Pullthrough,
            CheckSpec::Moment { .. } => CheckName::Moment,
            CheckSpec::Absence { .. } => CheckName::Absence,
            CheckSpec::Higher { .. } => CheckName::Higher,
            CheckSpec::Appendix { .. } => CheckName::Appendix,
            CheckSpec::Ccr {} => CheckName::Ccr,
            CheckSpec::IrSweep { .. } => CheckName::IrSweep,
        }
    }

    /// The spec `check <name>` runs when the config lists none of that kind.
    pub fn default_for(name: CheckName) -> Option<CheckSpec> {
        Some(match name {
            CheckName::Pullthrough => CheckSpec::Pullthrough { f: lambda0() },
            CheckName::Moment => CheckSpec::Moment { g: unit() },
            CheckName::Absence => CheckSpec::Absence {
                g: unit(),
                tol: INEQUALITY_TOL,
            },
            CheckName::Higher => CheckSpec::Higher { n: 2 },
            CheckName::Appendix => CheckSpec::Appendix {
                states: default_states(),
                k: omega(),
                max_order: default_order(),
            },
            CheckName::Ccr => CheckSpec::Ccr {},
            CheckName::IrSweep => return None,
        })
    }

    /// Whether the check consumes the ground state of the configured model.
    pub fn needs_ground_state(&self) -> bool {
        matches!(
            self,
            CheckSpec::Pullthrough { .. } | CheckSpec::Moment { .. } | CheckSpec::Absence { .. } | CheckSpec::Higher { .. }
        )
    }
}

/// Command-line replacements applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// Reads and parses a config file; parse errors carry the offending field path.
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })
}

impl RunConfig {
    /// Applies overrides and the environment, fills `threads`, and validates.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<RunConfig, CliError> {
        if let Some(out) = &overrides.out {
            self.output = out.clone();
        }
        if let Some(t) = overrides.threads {
            self.threads = Some(t);
        }
        if let Some(s) = overrides.seed {
            self.seed = s;
        }
        if let Ok(v) = std::env::var(MAX_DIM_ENV) {
            self.max_dim = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{MAX_DIM_ENV}: expected a positive integer, got {v:?}")))?;
        }
        if self.threads.is_none() {
            self.threads = Some(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        }
        self.validate()?;
        Ok(self)
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(1)
    }

    pub fn n_modes(&self) -> usize {
        match &self.grid {
            GridSpec::Radial { n_shells, .. } => *n_shells,
            GridSpec::Explicit { points, .. } => points.len(),
        }
    }

    /// Structural checks that need no allocation beyond the config itself.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg_err = |msg: String| CliError::Config(msg);
        if !self.alpha.is_finite() {
            return Err(cfg_err(format!("alpha: must be finite, got {}", self.alpha)));
        }
        if self.threads == Some(0) {
            return Err(cfg_err("threads: must be >= 1".into()));
        }
        if self.max_dim == 0 {
            return Err(cfg_err("max_dim: must be >= 1".into()));
        }
        self.solver.validate().map_err(|e| cfg_err(format!("solver: {e}")))?;
        let n_channels = self.model.n_channels();
        let m = self.n_modes();
        match &self.grid {
            GridSpec::Radial { nu, sigma, uv, n_shells, .. } => {
                if *nu == 0 || *n_shells == 0 || !(*sigma > 0.0) || !(*uv > *sigma) || !uv.is_finite() {
                    return Err(cfg_err(format!(
                        "grid: need nu >= 1, n_shells >= 1 and 0 < sigma < Lambda < inf (nu={nu}, n_shells={n_shells}, sigma={sigma}, Lambda={uv})"
                    )));
                }
                if !(self.coupling.len() == 1 || self.coupling.len() == n_channels) {
                    return Err(cfg_err(format!(
                        "coupling: radial grids need 1 or {n_channels} families, got {}",
                        self.coupling.len()
                    )));
                }
                for (j, fam) in self.coupling.iter().enumerate() {
                    fam.validate().map_err(|e| cfg_err(format!("coupling[{j}]: {e}")))?;
                }
            }
            GridSpec::Explicit { lambda, points, .. } => {
                if !self.coupling.is_empty() {
                    return Err(cfg_err("coupling: explicit grids carry their own lambda values".into()));
                }
                if points.is_empty() {
                    return Err(cfg_err("grid.points: empty".into()));
                }
                if lambda.len() != n_channels {
                    return Err(cfg_err(format!(
                        "grid.lambda: {} channels for a model with {n_channels}",
                        lambda.len()
                    )));
                }
            }
        }
        if let DispersionLaw::Massive(mass) = self.dispersion {
            if !(mass >= 0.0) || !mass.is_finite() {
                return Err(cfg_err(format!("dispersion.massive: must be finite and >= 0, got {mass}")));
            }
        }
        let fock = fock_dimension(m, self.n_max);
        if fock > self.max_dim as u128 {
            return Err(cfg_err(format!(
                "n_max: Fock basis of dimension {fock} exceeds max_dim {} (raise it with {MAX_DIM_ENV})",
                self.max_dim
            )));
        }
        for (idx, check) in self.checks.iter().enumerate() {
            self.validate_check(&format!("checks[{idx}]"), check, m, n_channels)?;
        }
        Ok(())
    }

    pub fn validate_check(&self, path: &str, check: &CheckSpec, m: usize, n_channels: usize) -> Result<(), CliError> {
        let cfg_err = |msg: String| Err(CliError::Config(format!("{path}.{msg}")));
        match check {
            CheckSpec::Pullthrough { f } => f.validate(&format!("{path}.f"), m, n_channels),
            CheckSpec::Moment { g } => {
                g.validate(&format!("{path}.g"), m, n_channels)?;
                g.nonnegative(&format!("{path}.g"), m)
            }
            CheckSpec::Absence { g, tol } => {
                g.validate(&format!("{path}.g"), m, n_channels)?;
                g.nonnegative(&format!("{path}.g"), m)?;
                if !(*tol >= 0.0) {
                    return cfg_err(format!("tol: must be >= 0, got {tol}"));
                }
                Ok(())
            }
            CheckSpec::Higher { n } if !(1..=3).contains(n) => cfg_err(format!("n: must be 1, 2 or 3, got {n}")),
            CheckSpec::Higher { .. } | CheckSpec::Ccr {} => Ok(()),
            CheckSpec::Appendix { states, k, max_order } => {
                k.validate(&format!("{path}.k"), m, n_channels)?;
                if *states == 0 {
                    return cfg_err("states: must be >= 1".into());
                }
                if *max_order == 0 {
                    return cfg_err("max_order: must be >= 1".into());
                }
                Ok(())
            }
            CheckSpec::IrSweep {
                sigmas,
                shells_per_decade,
                cauchy_tol,
                r2_min,
                closed_form_tol,
            } => {
                let GridSpec::Radial { uv, .. } = &self.grid else {
                    return cfg_err("check: ir_sweep needs a radial grid".into());
                };
                if self.coupling.len() != 1 {
                    return cfg_err("check: ir_sweep needs exactly one coupling family".into());
                }
                if sigmas.is_empty() {
                    return cfg_err("sigmas: empty list".into());
                }
                if sigmas.windows(2).any(|w| !(w[1] < w[0])) {
                    return cfg_err("sigmas: must be strictly decreasing".into());
                }
                if sigmas.iter().any(|s| !(*s > 0.0 && s < uv)) {
                    return cfg_err(format!("sigmas: every sigma must lie in (0, {uv})"));
                }
                if *shells_per_decade == 0 {
                    return cfg_err("shells_per_decade: must be >= 1".into());
                }
                for (name, v) in [("cauchy_tol", cauchy_tol), ("r2_min", r2_min), ("closed_form_tol", closed_form_tol)] {
                    if !(*v >= 0.0) || !v.is_finite() {
                        return cfg_err(format!("{name}: must be finite and >= 0"));
                    }
                }
                let decades = (uv / sigmas[sigmas.len() - 1]).log10();
                let shells = ((*shells_per_decade as f64 * decades).round() as usize).max(1);
                if fock_dimension(shells, self.n_max) > self.max_dim as u128 {
                    return cfg_err(format!(
                        "sigmas: {shells} shells at the smallest cutoff exceed max_dim {}",
                        self.max_dim
                    ));
                }
                Ok(())
            }
        }
    }

    /// Mode set with every coupling channel filled in.
    pub fn build_grid(&self) -> Result<ModeSet, CliError> {
        let n_channels = self.model.n_channels();
        let grid = match &self.grid {
            GridSpec::Radial {
                nu,
                sigma,
                uv,
                n_shells,
                rule,
            } => {
                let mut grid = build_radial_grid(*nu, *sigma, *uv, *n_shells, *rule)
                    .map_err(config_error)?
                    .with_dispersion(self.dispersion);
                for j in 0..n_channels {
                    let fam = if self.coupling.len() == 1 { self.coupling[0] } else { self.coupling[j] };
                    grid.push_family(fam).map_err(config_error)?;
                }
                grid
            }
            GridSpec::Explicit {
                nu,
                points,
                weights,
                omega,
                lambda,
            } => {
                let ir = points.iter().cloned().fold(f64::INFINITY, f64::min);
                let mut grid = ModeSet::new(*nu, ir, points.clone(), weights.clone(), omega.clone()).map_err(config_error)?;
                for values in lambda {
                    grid.push_values(values.clone()).map_err(config_error)?;
                }
                grid
            }
        };
        Ok(grid)
    }
}

fn config_error(e: gsb_core::GsbError) -> CliError {
    CliError::Config(format!("grid: {e}"))
}
