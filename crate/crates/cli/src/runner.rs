//! Builds the configured model, runs the selected checks and collects reports.

use std::sync::Arc;

use gsb_core::fock::{FockBasis, StateVector, DEFAULT_SPARSE_THRESHOLD};
use gsb_core::linalg::{self, C64};
use gsb_core::model::{AssembleOptions, GsbModel};
use gsb_core::modes::{IrClass, ModeSet};
use gsb_core::regularity::{
    absence_lower_bound, ccr_and_bound_suite, factorial_moment_decomposition, higher_moment_identity, ir_sweep,
    moment_identity, number_decomposition, pullthrough_check, IrSweep, IrVerdict, ModelTemplate, RegularityReport,
    ReportMetadata, SweepOptions, INEQUALITY_TOL,
};
use gsb_core::spectral::GroundState;
use log::info;

use crate::config::{CheckSpec, GridSpec, RunConfig};
use crate::error::CliError;

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub reports: Vec<RegularityReport>,
    pub sweeps: Vec<IrSweep>,
    /// Set when an infrared sweep stopped on a solver failure.
    pub solver_failure: Option<String>,
    pub threads: usize,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    /// 0 when every check passed, 1 when one failed, 3 when a sweep aborted.
    pub fn exit_code(&self) -> i32 {
        if self.solver_failure.is_some() {
            3
        } else if self.all_pass() {
            0
        } else {
            1
        }
    }
}

/// Runs `checks` against the model of `cfg` inside a pool of `cfg.threads` workers.
pub fn execute(cfg: &RunConfig, checks: &[CheckSpec]) -> Result<Outcome, CliError> {
    let threads = cfg.threads();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    pool.install(|| Runner::new(cfg).run(checks))
}

struct Solved {
    model: GsbModel,
    gs: GroundState,
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    grid: Option<ModeSet>,
    basis: Option<Arc<FockBasis>>,
    solved: Option<Solved>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Runner {
            cfg,
            grid: None,
            basis: None,
            solved: None,
        }
    }

    fn run(mut self, checks: &[CheckSpec]) -> Result<Outcome, CliError> {
        let mut out = Outcome {
            reports: Vec::new(),
            sweeps: Vec::new(),
            solver_failure: None,
            threads: self.cfg.threads(),
        };
        for check in checks {
            let mut reports = match check {
                CheckSpec::IrSweep { .. } => {
                    let (sweep, reports) = self.sweep(check)?;
                    if let Some(msg) = &sweep.aborted {
                        out.solver_failure.get_or_insert_with(|| msg.clone());
                    }
                    out.sweeps.push(sweep);
                    reports
                }
                _ => self.check(check)?,
            };
            for r in &mut reports {
                r.metadata.seed = Some(self.cfg.seed);
                r.metadata.threads = Some(out.threads);
                info!("{}: rel_err {:.3e} ({})", r.check_name, r.rel_err, if r.pass { "pass" } else { "FAIL" });
            }
            out.reports.extend(reports);
        }
        Ok(out)
    }

    fn grid(&mut self) -> Result<&ModeSet, CliError> {
        if self.grid.is_none() {
            self.grid = Some(self.cfg.build_grid()?);
        }
        Ok(self.grid.as_ref().expect("grid built"))
    }

    fn basis(&mut self) -> Result<Arc<FockBasis>, CliError> {
        if let Some(s) = &self.solved {
            return Ok(s.model.basis.clone());
        }
        if self.basis.is_none() {
            let m = self.grid()?.len();
            self.basis = Some(Arc::new(FockBasis::with_max_dim(m, self.cfg.n_max, self.cfg.max_dim)?));
        }
        Ok(self.basis.clone().expect("basis built"))
    }

    fn solved(&mut self) -> Result<&Solved, CliError> {
        if self.solved.is_none() {
            let model = build_model(self.cfg, self.grid()?.clone())?;
            info!("model dimension {}; solving for the ground state", model.dim());
            let gs = model.ground_state(&self.cfg.solver)?;
            info!("E = {:.15e}, residual {:.3e}, w_top {:.3e}", gs.energy, gs.residual, gs.w_top.unwrap_or(0.0));
            self.solved = Some(Solved { model, gs });
        }
        Ok(self.solved.as_ref().expect("model solved"))
    }

    fn check(&mut self, check: &CheckSpec) -> Result<Vec<RegularityReport>, CliError> {
        let solver = self.cfg.solver.clone();
        match check {
            CheckSpec::Pullthrough { f } => {
                let s = self.solved()?;
                let fv: Vec<C64> = f.evaluate(&s.model.grid).into_iter().map(|v| C64::new(v, 0.0)).collect();
                let r = pullthrough_check(&s.model, &s.gs, &fv, &solver)?;
                Ok(vec![with_solve_stats(renamed(r, &format!("pullthrough({})", f.label())), &s.gs)])
            }
            CheckSpec::Moment { g } => {
                let s = self.solved()?;
                let r = moment_identity(&s.model, &s.gs, &g.evaluate(&s.model.grid), &solver)?;
                Ok(vec![with_solve_stats(renamed(r, &format!("moment({})", g.label())), &s.gs)])
            }
            CheckSpec::Absence { g, tol } => {
                let s = self.solved()?;
                let r = absence_lower_bound(&s.model, &s.gs, &g.evaluate(&s.model.grid), Some(*tol))?;
                Ok(vec![with_solve_stats(renamed(r, &format!("absence({})", g.label())), &s.gs)])
            }
            CheckSpec::Higher { n } => {
                let s = self.solved()?;
                let r = higher_moment_identity(&s.model, &s.gs, *n, &solver)?;
                Ok(vec![with_solve_stats(r, &s.gs)])
            }
            CheckSpec::Appendix { states, k, max_order } => self.appendix(*states, k, *max_order),
            CheckSpec::Ccr {} => {
                let basis = self.basis()?;
                let seed = self.cfg.seed;
                Ok(ccr_and_bound_suite(&basis, self.grid()?, seed)?)
            }
            CheckSpec::IrSweep { .. } => unreachable!("sweeps are dispatched separately"),
        }
    }

    fn appendix(
        &mut self,
        states: usize,
        k: &crate::config::ModeFunction,
        max_order: usize,
    ) -> Result<Vec<RegularityReport>, CliError> {
        let basis = self.basis()?;
        let grid = self.grid()?.clone();
        let d = self.cfg.model.matrices()?.0.nrows();
        let kv: Vec<C64> = k.evaluate(&grid).into_iter().map(|v| C64::new(v, 0.0)).collect();
        let mut rng = linalg::seeded_rng(self.cfg.seed);
        let psis: Vec<StateVector> = (0..states)
            .map(|_| {
                let mut amps = linalg::random_vector(&mut rng, d * basis.dim());
                linalg::normalize(&mut amps);
                StateVector::new(d, amps)
            })
            .collect::<gsb_core::Result<_>>()?;

        let mut out = Vec::new();
        let worst = |reports: Vec<RegularityReport>| {
            let n = reports.len() as f64;
            let failures = reports.iter().filter(|r| !r.pass).count() as f64;
            reports
                .into_iter()
                .max_by(|a, b| a.rel_err.total_cmp(&b.rel_err))
                .expect("at least one state")
                .with_stat("states", n)
                .with_stat("failures", failures)
        };
        let num = psis
            .iter()
            .map(|psi| number_decomposition(psi, &kv, &basis, &grid))
            .collect::<gsb_core::Result<Vec<_>>>()?;
        out.push(renamed(worst(num), &format!("number_decomposition({})", k.label())));
        for n in 1..=max_order.min(basis.n_max()) {
            let reps = psis
                .iter()
                .map(|psi| factorial_moment_decomposition(psi, n, &basis))
                .collect::<gsb_core::Result<Vec<_>>>()?;
            out.push(worst(reps));
        }
        Ok(out)
    }

    fn sweep(&mut self, check: &CheckSpec) -> Result<(IrSweep, Vec<RegularityReport>), CliError> {
        let CheckSpec::IrSweep {
            sigmas,
            shells_per_decade,
            cauchy_tol,
            r2_min,
            closed_form_tol,
        } = check
        else {
            unreachable!("called with a sweep spec")
        };
        let GridSpec::Radial { nu, uv, .. } = &self.cfg.grid else {
            return Err(CliError::Config("ir_sweep needs a radial grid".into()));
        };
        let template = ModelTemplate {
            dispersion: self.cfg.dispersion,
            max_dim: self.cfg.max_dim,
            ..ModelTemplate::new(self.cfg.model.clone(), *nu, *uv, self.cfg.n_max)
        };
        let opts = SweepOptions {
            cauchy_tol: *cauchy_tol,
            r2_min: *r2_min,
        };
        let family = self.cfg.coupling[0];
        let sweep = ir_sweep(
            &family,
            &template,
            sigmas,
            *shells_per_decade,
            self.cfg.alpha,
            &self.cfg.solver,
            &opts,
        )?;
        let matter_dim = self.cfg.model.matrices()?.0.nrows();
        let reports = sweep_reports(&sweep, &template, matter_dim, self.cfg.alpha, *closed_form_tol);
        Ok((sweep, reports))
    }
}

/// Assembles the configured model on `grid`.
pub fn build_model(cfg: &RunConfig, grid: ModeSet) -> Result<GsbModel, CliError> {
    let (a, b) = cfg.model.matrices()?;
    Ok(GsbModel::assemble_with(
        a,
        b,
        grid,
        cfg.alpha,
        cfg.n_max,
        AssembleOptions {
            max_dim: cfg.max_dim,
            sparse_threshold: DEFAULT_SPARSE_THRESHOLD,
        },
    )?)
}

fn renamed(mut r: RegularityReport, name: &str) -> RegularityReport {
    r.check_name = name.to_string();
    r
}

fn with_solve_stats(r: RegularityReport, gs: &GroundState) -> RegularityReport {
    let r = r
        .with_stat("energy", gs.energy)
        .with_stat("eig_residual", gs.residual)
        .with_stat("eig_iterations", gs.iterations as f64)
        .with_stat("near_degenerate", if gs.near_degenerate { 1.0 } else { 0.0 });
    match gs.gap {
        Some(g) => r.with_stat("gap", g),
        None => r,
    }
}

fn verdict_code(v: IrVerdict) -> f64 {
    match v {
        IrVerdict::Diverging => 1.0,
        IrVerdict::Converging => -1.0,
        IrVerdict::Inconclusive => 0.0,
    }
}

/// Per-cutoff absence and closed-form rows plus one verdict row.
///
/// The verdict row encodes diverging/converging/inconclusive as 1/-1/0 in
/// `lhs` and the analytic class (singular 1, regular -1) in `rhs`.
pub fn sweep_reports(
    sweep: &IrSweep,
    template: &ModelTemplate,
    matter_dim: usize,
    alpha: f64,
    closed_form_tol: f64,
) -> Vec<RegularityReport> {
    let mut out = Vec::new();
    for row in &sweep.rows {
        let meta = ReportMetadata {
            n_modes: row.n_shells,
            n_max: template.n_max,
            matter_dim,
            alpha: Some(alpha),
            nu: Some(template.nu),
            ir_cutoff: Some(row.sigma),
            ..ReportMetadata::default()
        };
        out.push(
            RegularityReport::inequality(
                &format!("ir_sweep_absence(sigma={:e})", row.sigma),
                row.expectation_n,
                row.absence_bound,
                row.w_top,
                INEQUALITY_TOL,
                meta.clone(),
            )
            .with_stat("energy", row.energy)
            .with_stat("eig_residual", row.residual)
            .with_note("finite truncation: checks the proof inequality; divergence is probed by infrared sweeps"),
        );
        if let Some(cf) = row.closed_form_n {
            out.push(RegularityReport::identity(
                &format!("ir_sweep_closed_form(sigma={:e})", row.sigma),
                row.expectation_n,
                cf,
                row.w_top,
                closed_form_tol,
                meta,
            ));
        }
    }
    let expected = match sweep.expected {
        IrClass::Singular => 1.0,
        IrClass::Regular => -1.0,
    };
    let w_top = sweep.rows.iter().map(|r| r.w_top).fold(0.0, f64::max);
    let meta = ReportMetadata {
        n_modes: sweep.rows.last().map_or(0, |r| r.n_shells),
        n_max: template.n_max,
        matter_dim,
        alpha: Some(alpha),
        nu: Some(template.nu),
        ir_cutoff: sweep.rows.last().map(|r| r.sigma),
        ..ReportMetadata::default()
    };
    let mut verdict = RegularityReport::identity("ir_sweep_verdict", verdict_code(sweep.verdict), expected, w_top, 0.0, meta)
        .with_stat("log_slope", sweep.fit.log_slope)
        .with_stat("log_r2", sweep.fit.log_r2)
        .with_stat("rows", sweep.rows.len() as f64);
    if let (Some(s), Some(r2)) = (sweep.fit.power_slope, sweep.fit.power_r2) {
        verdict = verdict.with_stat("power_slope", s).with_stat("power_r2", r2);
    }
    if let Some(d) = sweep.fit.increments.last() {
        verdict = verdict.with_stat("final_increment", *d);
    }
    let mut note = format!("verdict {:?}, analytic class {:?}", sweep.verdict, sweep.expected).to_lowercase();
    if let Some(msg) = &sweep.aborted {
        note.push_str(&format!("; aborted at {msg}"));
    }
    out.push(verdict.with_note(&note));
    out
}
