//! Artifact writers: JSON reports, flat CSV tables and MatrixMarket operators.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use gsb_core::fock::{Csr, FockBasis};
use gsb_core::modes::ModeSet;
use gsb_core::regularity::{IrSweep, RegularityReport};
use serde::Serialize;

use crate::error::CliError;

pub const RESOLVED_CONFIG: &str = "resolved_config.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";
pub const GRID_CSV: &str = "grid.csv";
pub const BASIS_CSV: &str = "basis.csv";
pub const OPERATOR_MTX: &str = "hamiltonian.mtx";

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct ReportRow<'a> {
    check_name: &'a str,
    lhs: f64,
    rhs: f64,
    rel_err: f64,
    w_top: f64,
    pass: bool,
}

pub fn write_report_csv(path: &Path, reports: &[RegularityReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(ReportRow {
            check_name: &r.check_name,
            lhs: r.lhs,
            rhs: r.rhs,
            rel_err: r.rel_err,
            w_top: r.w_top,
            pass: r.pass,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    sweep: usize,
    sigma: f64,
    n_shells: usize,
    dim: usize,
    energy: f64,
    residual: f64,
    expectation_n: f64,
    absence_bound: f64,
    lam_over_w_norm: f64,
    closed_form_n: Option<f64>,
    w_top: f64,
}

pub fn write_sweep_csv(path: &Path, sweeps: &[IrSweep]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for (k, s) in sweeps.iter().enumerate() {
        for r in &s.rows {
            w.serialize(SweepRow {
                sweep: k,
                sigma: r.sigma,
                n_shells: r.n_shells,
                dim: r.dim,
                energy: r.energy,
                residual: r.residual,
                expectation_n: r.expectation_n,
                absence_bound: r.absence_bound,
                lam_over_w_norm: r.lam_over_w_norm,
                closed_form_n: r.closed_form_n,
                w_top: r.w_top,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `i, r, w, omega, lambda_1..lambda_J`.
pub fn write_grid_csv(path: &Path, grid: &ModeSet) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["i".to_string(), "r".into(), "w".into(), "omega".into()];
    header.extend((1..=grid.n_channels()).map(|j| format!("lambda_{j}")));
    w.write_record(&header)?;
    for i in 0..grid.len() {
        let mut rec = vec![
            i.to_string(),
            grid.points[i].to_string(),
            grid.weights[i].to_string(),
            grid.omega[i].to_string(),
        ];
        rec.extend(grid.channels.iter().map(|c| c.values[i].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `index, total, n_1..n_M`, one row per occupation tuple in basis order.
pub fn write_basis_csv(path: &Path, basis: &FockBasis) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["index".to_string(), "total".into()];
    header.extend((1..=basis.n_modes()).map(|i| format!("n_{i}")));
    w.write_record(&header)?;
    for (t, occ) in basis.states().enumerate() {
        let mut rec = vec![t.to_string(), basis.total(t).to_string()];
        rec.extend(occ.iter().map(|n| n.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// MatrixMarket `coordinate complex general`, 1-based indices, shortest
/// round-trip float formatting.
pub fn write_matrix_market(path: &Path, m: &Csr, comment: &str) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
    for line in comment.lines() {
        writeln!(w, "% {line}")?;
    }
    writeln!(w, "{} {} {}", m.nrows, m.ncols, m.nnz())?;
    for (r, c, v) in m.triplets() {
        writeln!(w, "{} {} {:e} {:e}", r + 1, c + 1, v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}
