use rayon::prelude::*;

use super::{require_ground_state, resolvent_tol, RegularityReport, ReportMetadata, INEQUALITY_TOL};
use crate::error::{GsbError, Result};
use crate::linalg::{self, C64};
use crate::model::GsbModel;
use crate::spectral::{GroundState, Resolvent, SolverConfig};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

struct ModeSolve {
    vector: Vec<C64>,
    residual: f64,
    iterations: usize,
}

/// `(Ĥ + ω_i)^-1 T(k_i) φ_g` for each listed mode.
fn solve_modes(model: &GsbModel, gs: &GroundState, modes: &[usize], cfg: &SolverConfig) -> Result<Vec<ModeSolve>> {
    let res = Resolvent::new(&model.h, gs.energy, cfg)?;
    modes
        .par_iter()
        .map(|&i| {
            let rhs = model.apply_t(i, &gs.vector);
            res.solve(model.grid.omega[i], &rhs)
                .map(|s| ModeSolve {
                    vector: s.solution,
                    residual: s.relative_residual,
                    iterations: s.iterations,
                })
                .map_err(|e| GsbError::BatchItem {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

fn residual_stats(report: RegularityReport, n_modes: usize, modes: &[usize], solves: &[ModeSolve]) -> RegularityReport {
    let mut residuals = vec![0.0; n_modes];
    for (&i, s) in modes.iter().zip(solves) {
        residuals[i] = s.residual;
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let iterations: usize = solves.iter().map(|s| s.iterations).sum();
    let mut report = report
        .with_stat("resolvent_solves", solves.len() as f64)
        .with_stat("resolvent_iterations", iterations as f64)
        .with_stat("resolvent_max_residual", worst);
    report.mode_residuals = residuals;
    report
}

fn diagonal_expectation(v: &[C64], diag: &[f64]) -> f64 {
    v.iter().zip(diag).map(|(x, d)| x.norm_sqr() * d).sum()
}

fn check_g(model: &GsbModel, g: &[f64]) -> Result<()> {
    if g.len() != model.n_modes() {
        return Err(GsbError::DimensionMismatch(format!(
            "G has {} entries for {} modes",
            g.len(),
            model.n_modes()
        )));
    }
    if let Some(i) = g.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(GsbError::InvalidArgument(format!(
            "G must be finite and nonnegative, G[{i}] = {}",
            g[i]
        )));
    }
    Ok(())
}

/// Compares `(1 ⊗ a(f)) φ_g` with `-α Σ_i conj(f_i) w_i (Ĥ + ω_i)^-1 T(k_i) φ_g`.
///
/// `lhs` holds the norm of the difference and `rhs` the norm of the
/// resolvent side.
pub fn pullthrough_check(
    model: &GsbModel,
    gs: &GroundState,
    f: &[C64],
    cfg: &SolverConfig,
) -> Result<RegularityReport> {
    let w_top = require_ground_state(model, gs)?;
    let af = model.smeared_annihilator(f)?.apply_vec(&gs.vector);
    let modes: Vec<usize> = if model.alpha == 0.0 {
        Vec::new()
    } else {
        (0..model.n_modes()).filter(|&i| f[i] != ZERO).collect()
    };
    let solves = solve_modes(model, gs, &modes, cfg)?;
    let mut rhs = vec![ZERO; model.dim()];
    for (&i, s) in modes.iter().zip(&solves) {
        let c = -model.alpha * model.grid.weights[i] * f[i].conj();
        linalg::axpy(c, &s.vector, &mut rhs);
    }
    let diff = linalg::norm(&linalg::sub(&af, &rhs));
    let rhs_norm = linalg::norm(&rhs);
    let af_norm = linalg::norm(&af);
    let rel = diff / rhs_norm.max(af_norm).max(1e-300);
    let tol = resolvent_tol(w_top, cfg.cg_tol);
    let report = RegularityReport::discrepancy(
        "pullthrough",
        diff,
        rhs_norm,
        diff,
        rel,
        w_top,
        tol,
        ReportMetadata::for_model(model),
    )
    .with_stat("annihilated_norm", af_norm);
    Ok(residual_stats(report, model.n_modes(), &modes, &solves))
}

/// `<φ_g, (1 ⊗ dΓ(G)) φ_g>` against `α² Σ_i G_i w_i |(Ĥ + ω_i)^-1 T(k_i) φ_g|²`.
pub fn moment_identity(model: &GsbModel, gs: &GroundState, g: &[f64], cfg: &SolverConfig) -> Result<RegularityReport> {
    check_g(model, g)?;
    let w_top = require_ground_state(model, gs)?;
    let lhs = diagonal_expectation(&gs.vector, &model.dgamma_diagonal(g)?);
    let modes: Vec<usize> = if model.alpha == 0.0 {
        Vec::new()
    } else {
        (0..model.n_modes()).filter(|&i| g[i] > 0.0).collect()
    };
    let solves = solve_modes(model, gs, &modes, cfg)?;
    let mut rhs = 0.0;
    for (&i, s) in modes.iter().zip(&solves) {
        rhs += g[i] * model.grid.weights[i] * linalg::norm_sqr(&s.vector);
    }
    rhs *= model.alpha * model.alpha;
    let tol = resolvent_tol(w_top, cfg.cg_tol);
    let report = RegularityReport::identity("moment", lhs, rhs, w_top, tol, ReportMetadata::for_model(model));
    Ok(residual_stats(report, model.n_modes(), &modes, &solves))
}

/// `<φ_g, (1 ⊗ dΓ(G)) φ_g> >= α² Σ_i G_i w_i |<φ_g, T(k_i) φ_g>|² / ω_i²`.
///
/// The right side is what the resolvent representation of the moment yields
/// after projecting onto `φ_g`; it needs no linear solves.
pub fn absence_lower_bound(model: &GsbModel, gs: &GroundState, g: &[f64], tol: Option<f64>) -> Result<RegularityReport> {
    check_g(model, g)?;
    let w_top = require_ground_state(model, gs)?;
    let lhs = diagonal_expectation(&gs.vector, &model.dgamma_diagonal(g)?);
    let mut rhs = 0.0;
    let mut strongest: f64 = 0.0;
    for i in 0..model.n_modes() {
        if g[i] == 0.0 {
            continue;
        }
        let t = linalg::dot(&gs.vector, &model.apply_t(i, &gs.vector));
        strongest = strongest.max(t.norm());
        let o = model.grid.omega[i];
        rhs += g[i] * model.grid.weights[i] * t.norm_sqr() / (o * o);
    }
    rhs *= model.alpha * model.alpha;
    Ok(RegularityReport::inequality(
        "absence",
        lhs,
        rhs,
        w_top,
        tol.unwrap_or(INEQUALITY_TOL),
        ReportMetadata::for_model(model),
    )
    .with_stat("max_t_expectation", strongest)
    .with_note("finite truncation: checks the proof inequality; divergence is probed by infrared sweeps"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn max_modes(n: usize) -> usize {
    match n {
        1 => usize::MAX,
        2 => 8,
        _ => 4,
    }
}

fn falling_factorial_diag(model: &GsbModel, n: usize) -> Result<Vec<f64>> {
    let number = model.dgamma_diagonal(&vec![1.0; model.n_modes()])?;
    Ok(number
        .into_iter()
        .map(|nn| (1..=n).map(|j| (nn - j as f64 + 1.0).max(0.0)).product())
        .collect())
}

/// Resolvent chain `R_1 T(k_{s_1}) R_2 T(k_{s_2}) ⋯ R_n T(k_{s_n}) φ_g`,
/// `R_i = (Ĥ + Σ_{j >= i} ω_{s_j})^-1`, solved directly.
fn chain(model: &GsbModel, gs: &GroundState, res: &Resolvent, seq: &[usize]) -> Result<Vec<C64>> {
    let mut v = gs.vector.clone();
    let mut shift = 0.0;
    for &i in seq.iter().rev() {
        shift += model.grid.omega[i];
        v = res.solve(shift, &model.apply_t(i, &v))?.solution;
    }
    Ok(v)
}

/// One term of the factorial-moment expansion:
/// `α^{2n} w_{i_1} ⋯ w_{i_n} |Σ_σ R_1^σ T(k_{σ(1)}) ⋯ R_n^σ T(k_{σ(n)}) φ_g|²`,
/// computed without memoization.
pub fn higher_moment_summand(model: &GsbModel, gs: &GroundState, tuple: &[usize], cfg: &SolverConfig) -> Result<f64> {
    require_ground_state(model, gs)?;
    if let Some(&i) = tuple.iter().find(|&&i| i >= model.n_modes()) {
        return Err(GsbError::InvalidArgument(format!("mode index {i} out of range")));
    }
    let res = Resolvent::new(&model.h, gs.energy, cfg)?;
    let mut sum = vec![ZERO; model.dim()];
    for p in permutations(tuple.len()) {
        let seq: Vec<usize> = p.iter().map(|&k| tuple[k]).collect();
        let v = chain(model, gs, &res, &seq)?;
        linalg::axpy(C64::new(1.0, 0.0), &v, &mut sum);
    }
    let w: f64 = tuple.iter().map(|&i| model.grid.weights[i]).product();
    Ok(model.alpha.powi(2 * tuple.len() as i32) * w * linalg::norm_sqr(&sum))
}

/// `<φ_g, Π_{j=1}^n (N - j + 1)_+ φ_g>` against the sum over mode tuples of
/// symmetrized resolvent chains, for `n` in `1..=3`.
///
/// Chains are built suffix-first: the vector for a mode sequence is one
/// solve applied to the vector of its tail, so every distinct sequence is
/// solved exactly once.
pub fn higher_moment_identity(
    model: &GsbModel,
    gs: &GroundState,
    n: usize,
    cfg: &SolverConfig,
) -> Result<RegularityReport> {
    if !(1..=3).contains(&n) {
        return Err(GsbError::InvalidArgument(format!("moment order must be 1, 2 or 3, got {n}")));
    }
    let m = model.n_modes();
    if m > max_modes(n) {
        return Err(GsbError::CostGuard(format!(
            "order-{n} chains need {m}^{n} mode tuples; at most {} modes are allowed",
            max_modes(n)
        )));
    }
    let w_top = require_ground_state(model, gs)?;
    let lhs = diagonal_expectation(&gs.vector, &falling_factorial_diag(model, n)?);
    let perms = permutations(n);
    let n_fact = perms.len();
    let lookups = m.pow(n as u32) * n_fact * n;

    let (rhs, solves, iterations, worst) = if model.alpha == 0.0 {
        (0.0, 0usize, 0usize, 0.0)
    } else {
        let res = Resolvent::new(&model.h, gs.energy, cfg)?;
        // levels[l][key]: vector of the mode sequence whose base-m digits are `key`, length l + 1
        let mut levels: Vec<Vec<Vec<C64>>> = Vec::with_capacity(n);
        let mut solves = 0;
        let mut iterations = 0;
        let mut worst: f64 = 0.0;
        for len in 1..=n {
            let tail_size = m.pow(len as u32 - 1);
            let level: Vec<(Vec<C64>, usize, f64)> = (0..m * tail_size)
                .into_par_iter()
                .map(|key| {
                    let head = key / tail_size;
                    let tail = key % tail_size;
                    let (input, tail_shift) = if len == 1 {
                        (&gs.vector, 0.0)
                    } else {
                        (&levels[len - 2][tail], shift_of(model, tail, len - 1))
                    };
                    let shift = tail_shift + model.grid.omega[head];
                    res.solve(shift, &model.apply_t(head, input))
                        .map(|s| (s.solution, s.iterations, s.relative_residual))
                        .map_err(|e| GsbError::BatchItem {
                            index: key,
                            source: Box::new(e),
                        })
                })
                .collect::<Result<_>>()?;
            solves += level.len();
            iterations += level.iter().map(|l| l.1).sum::<usize>();
            worst = level.iter().map(|l| l.2).fold(worst, f64::max);
            levels.push(level.into_iter().map(|l| l.0).collect());
        }
        let full = &levels[n - 1];
        let summands: Vec<f64> = (0..m.pow(n as u32))
            .into_par_iter()
            .map(|t| {
                let digits = digits_of(t, m, n);
                let mut sum = vec![ZERO; model.dim()];
                for p in &perms {
                    let key = p.iter().fold(0, |acc, &k| acc * m + digits[k]);
                    linalg::axpy(C64::new(1.0, 0.0), &full[key], &mut sum);
                }
                let w: f64 = digits.iter().map(|&i| model.grid.weights[i]).product();
                w * linalg::norm_sqr(&sum)
            })
            .collect();
        let total: f64 = summands.iter().sum();
        (total * model.alpha.powi(2 * n as i32), solves, iterations, worst)
    };
    let tol = resolvent_tol(w_top, cfg.cg_tol);
    let hit_rate = if lookups == 0 { 0.0 } else { 1.0 - solves as f64 / lookups as f64 };
    Ok(RegularityReport::identity(
        &format!("higher_moment_n{n}"),
        lhs,
        rhs,
        w_top,
        tol,
        ReportMetadata::for_model(model),
    )
    .with_stat("order", n as f64)
    .with_stat("resolvent_solves", solves as f64)
    .with_stat("solve_budget", (m.pow(n as u32) * n_fact) as f64)
    .with_stat("chain_lookups", lookups as f64)
    .with_stat("memo_hit_rate", hit_rate)
    .with_stat("resolvent_iterations", iterations as f64)
    .with_stat("resolvent_max_residual", worst))
}

fn digits_of(key: usize, m: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    let mut k = key;
    for slot in d.iter_mut().rev() {
        *slot = k % m;
        k /= m;
    }
    d
}

fn shift_of(model: &GsbModel, key: usize, len: usize) -> f64 {
    digits_of(key, model.n_modes(), len)
        .iter()
        .map(|&i| model.grid.omega[i])
        .sum()
}
