//! Config-driven runner: build a model, solve it, run the selected checks and
//! write JSON/CSV artifacts. Exit codes: 0 all checks pass, 1 a check failed,
//! 2 configuration error, 3 solver failure.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsb_core::fock::FockBasis;

pub use config::{CheckName, CheckSpec, GridSpec, ModeFunction, Overrides, RunConfig};
pub use error::CliError;
pub use runner::{execute, Outcome};

#[derive(Debug, Parser)]
#[command(name = "gsb", version, about = "Ground states and regularity checks for generalized spin-boson models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, replacing the config's `output`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads, replacing the config's `threads`.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Write the resolved config and stop.
    #[arg(long)]
    pub dry_run: bool,
    /// Seed for random draws, replacing the config's `seed`.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            threads: self.threads,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DumpTarget {
    /// Occupation tuples, one CSV row per basis state.
    Basis,
    /// The Hamiltonian in MatrixMarket coordinate format.
    Operator,
    /// Mode nodes, weights, dispersion and couplings as CSV.
    Grid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every check listed in the config.
    Run(CommonArgs),
    /// Run only the infrared sweeps listed in the config.
    Sweep(CommonArgs),
    /// Run the checks of one kind (with defaults when the config lists none).
    Check {
        name: CheckName,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Write the basis, the Hamiltonian or the mode grid.
    Dump {
        what: DumpTarget,
        #[command(flatten)]
        args: CommonArgs,
    },
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a) | Command::Sweep(a) => a,
            Command::Check { args, .. } | Command::Dump { args, .. } => args,
        }
    }
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => main_with(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

pub fn main_with(cli: Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads, resolves and writes `resolved_config.json`.
pub fn prepare(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let cfg = config::load(&args.config)?.resolve(&args.overrides())?;
    fs::create_dir_all(&cfg.output)?;
    output::write_json(&cfg.output.join(output::RESOLVED_CONFIG), &cfg)?;
    Ok(cfg)
}

fn dispatch(cmd: &Command) -> Result<i32, CliError> {
    let args = cmd.args();
    let cfg = prepare(args)?;
    if args.dry_run {
        println!("resolved config written to {}", cfg.output.join(output::RESOLVED_CONFIG).display());
        return Ok(0);
    }
    let checks = match cmd {
        Command::Dump { what, .. } => {
            dump(&cfg, *what)?;
            return Ok(0);
        }
        Command::Run(_) => {
            if cfg.checks.is_empty() {
                return Err(CliError::Config("checks: nothing to run".into()));
            }
            cfg.checks.clone()
        }
        Command::Sweep(_) => select(&cfg, CheckName::IrSweep)?,
        Command::Check { name, .. } => select(&cfg, *name)?,
    };
    let outcome = execute(&cfg, &checks)?;
    write_outcome(&cfg.output, &outcome)?;
    for r in &outcome.reports {
        println!(
            "{} {} rel_err={:.3e} w_top={:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check_name,
            r.rel_err,
            r.w_top
        );
    }
    if let Some(msg) = &outcome.solver_failure {
        eprintln!("error: solver failure in sweep: {msg}");
    }
    Ok(outcome.exit_code())
}

/// Checks of one kind from the config, or that kind's default spec.
fn select(cfg: &RunConfig, name: CheckName) -> Result<Vec<CheckSpec>, CliError> {
    let listed: Vec<CheckSpec> = cfg.checks.iter().filter(|c| c.name() == name).cloned().collect();
    if !listed.is_empty() {
        return Ok(listed);
    }
    let spec = CheckSpec::default_for(name)
        .ok_or_else(|| CliError::Config(format!("checks: no {name:?} entry to run").to_lowercase()))?;
    cfg.validate_check("check", &spec, cfg.n_modes(), cfg.model.n_channels())?;
    Ok(vec![spec])
}

/// Writes `report.json`, `report.csv`, and the sweep tables when sweeps ran.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<(), CliError> {
    output::write_json(&dir.join(output::REPORT_JSON), &outcome.reports)?;
    output::write_report_csv(&dir.join(output::REPORT_CSV), &outcome.reports)?;
    if !outcome.sweeps.is_empty() {
        output::write_sweep_csv(&dir.join(output::SWEEP_CSV), &outcome.sweeps)?;
        output::write_json(&dir.join(output::SWEEP_JSON), &outcome.sweeps)?;
    }
    Ok(())
}

fn dump(cfg: &RunConfig, what: DumpTarget) -> Result<(), CliError> {
    let grid = cfg.build_grid()?;
    match what {
        DumpTarget::Grid => output::write_grid_csv(&cfg.output.join(output::GRID_CSV), &grid),
        DumpTarget::Basis => {
            let basis = Arc::new(FockBasis::with_max_dim(grid.len(), cfg.n_max, cfg.max_dim)?);
            output::write_basis_csv(&cfg.output.join(output::BASIS_CSV), &basis)
        }
        DumpTarget::Operator => {
            let model = runner::build_model(cfg, grid)?;
            let comment = format!(
                "hamiltonian: matter dim {}, {} modes, n_max {}, alpha {}; index = matter * fock_dim + fock",
                model.matter_dim(),
                model.n_modes(),
                model.n_max,
                model.alpha
            );
            output::write_matrix_market(&cfg.output.join(output::OPERATOR_MTX), &model.h.to_csr(), &comment)
        }
    }
}
