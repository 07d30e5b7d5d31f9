use std::sync::Arc;

use rand::Rng;

use super::{RegularityReport, ReportMetadata, EXACT_TOL};
use crate::error::{GsbError, Result};
use crate::fock::{self, FockBasis, LinOp, StateVector};
use crate::linalg::{self, C64};
use crate::modes::ModeSet;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const BOUND_DRAWS: usize = 200;

fn fock_metadata(basis: &FockBasis, matter_dim: usize) -> ReportMetadata {
    ReportMetadata {
        n_modes: basis.n_modes(),
        n_max: basis.n_max(),
        matter_dim,
        ..ReportMetadata::default()
    }
}

fn check_state(psi: &StateVector, basis: &FockBasis) -> Result<()> {
    if psi.matter_dim == 0 || psi.amplitudes.len() != psi.matter_dim * basis.dim() {
        return Err(GsbError::DimensionMismatch(format!(
            "state of length {} does not factor as {} x {}",
            psi.amplitudes.len(),
            psi.matter_dim,
            basis.dim()
        )));
    }
    Ok(())
}

/// Fock-space diagonal repeated over the matter index.
fn lift(diag: &[f64], matter_dim: usize) -> Vec<f64> {
    (0..matter_dim).flat_map(|_| diag.iter().cloned()).collect()
}

fn expectation(v: &[C64], diag: &[f64]) -> f64 {
    v.iter().zip(diag).map(|(x, d)| x.norm_sqr() * d).sum()
}

/// `Σ_m |a(K* e_m) Ψ|²` against `<Ψ, dΓ(|K|²) Ψ>`, with `e_m` the normalized
/// indicator of cell `m`. Exact on the truncated space.
pub fn number_decomposition(
    psi: &StateVector,
    k: &[C64],
    basis: &Arc<FockBasis>,
    grid: &ModeSet,
) -> Result<RegularityReport> {
    check_state(psi, basis)?;
    if k.len() != basis.n_modes() || grid.len() != basis.n_modes() {
        return Err(GsbError::DimensionMismatch(format!(
            "K has {} entries and the grid {} modes for a basis over {} modes",
            k.len(),
            grid.len(),
            basis.n_modes()
        )));
    }
    let mut lhs = 0.0;
    for m in 0..basis.n_modes() {
        let mut f = vec![ZERO; basis.n_modes()];
        f[m] = k[m].conj() / grid.weights[m].sqrt();
        let a = fock::fock_only(psi.matter_dim, fock::smeared_annihilator(&f, grid, basis)?);
        lhs += linalg::norm_sqr(&a.apply_vec(&psi.amplitudes));
    }
    let k2: Vec<f64> = k.iter().map(|v| v.norm_sqr()).collect();
    let rhs = expectation(&psi.amplitudes, &lift(&fock::dgamma_diagonal(&k2, basis)?, psi.matter_dim));
    Ok(RegularityReport::identity(
        "number_decomposition",
        lhs,
        rhs,
        fock::top_weight(&psi.amplitudes, basis),
        EXACT_TOL,
        fock_metadata(basis, psi.matter_dim),
    ))
}

/// `Σ_{i_1..i_n} |a_{i_1} ⋯ a_{i_n} Ψ|²` against `<Ψ, Π_{j=1}^n (N - j + 1)_+ Ψ>`.
pub fn factorial_moment_decomposition(psi: &StateVector, n: usize, basis: &Arc<FockBasis>) -> Result<RegularityReport> {
    check_state(psi, basis)?;
    if n == 0 || n > basis.n_max() {
        return Err(GsbError::InvalidArgument(format!(
            "order must lie in 1..={}, got {n}",
            basis.n_max()
        )));
    }
    let m = basis.n_modes();
    let tuples = (m as f64).powi(n as i32);
    if tuples > 1e6 {
        return Err(GsbError::CostGuard(format!("{m}^{n} annihilator chains")));
    }
    let ops: Vec<LinOp> = (0..m)
        .map(|i| fock::annihilator(i, basis).map(|a| fock::fock_only(psi.matter_dim, a)))
        .collect::<Result<_>>()?;
    let lhs = chain_sum(&ops, &psi.amplitudes, n);
    let number = fock::dgamma_diagonal(&vec![1.0; m], basis)?;
    let ff: Vec<f64> = number
        .iter()
        .map(|nn| (1..=n).map(|j| (nn - j as f64 + 1.0).max(0.0)).product())
        .collect();
    let rhs = expectation(&psi.amplitudes, &lift(&ff, psi.matter_dim));
    Ok(RegularityReport::identity(
        &format!("factorial_moment_decomposition_n{n}"),
        lhs,
        rhs,
        fock::top_weight(&psi.amplitudes, basis),
        EXACT_TOL,
        fock_metadata(basis, psi.matter_dim),
    ))
}

fn chain_sum(ops: &[LinOp], v: &[C64], depth: usize) -> f64 {
    if depth == 0 {
        return linalg::norm_sqr(v);
    }
    ops.iter().map(|a| chain_sum(ops, &a.apply_vec(v), depth - 1)).sum()
}

fn random_interior<R: Rng>(rng: &mut R, basis: &FockBasis) -> Vec<C64> {
    let mut v = linalg::random_vector(rng, basis.dim());
    fock::drop_top_layer(&mut v, basis);
    linalg::normalize(&mut v);
    v
}

fn random_column<R: Rng>(rng: &mut R, m: usize) -> Vec<C64> {
    linalg::random_vector(rng, m)
}

fn commutator(x: &LinOp, y: &LinOp, v: &[C64]) -> Vec<C64> {
    let a = x.apply_vec(&y.apply_vec(v));
    let b = y.apply_vec(&x.apply_vec(v));
    linalg::sub(&a, &b)
}

/// Accumulates `|x - y|²` and `|x|²`, `|y|²` over many vector identities.
#[derive(Default)]
struct Accumulator {
    diff: f64,
    lhs: f64,
    rhs: f64,
}

impl Accumulator {
    fn add(&mut self, x: &[C64], y: &[C64]) {
        self.diff += linalg::norm_sqr(&linalg::sub(x, y));
        self.lhs += linalg::norm_sqr(x);
        self.rhs += linalg::norm_sqr(y);
    }

    fn report(&self, name: &str, w_top: f64, meta: ReportMetadata) -> RegularityReport {
        let (lhs, rhs, diff) = (self.lhs.sqrt(), self.rhs.sqrt(), self.diff.sqrt());
        let rel = diff / lhs.max(rhs).max(1e-300);
        RegularityReport::discrepancy(name, lhs, rhs, diff, rel, w_top, EXACT_TOL, meta)
    }
}

/// All commutation relations among single-mode and smeared ladder operators,
/// evaluated on `v`.
fn ccr_on(v: &[C64], basis: &Arc<FockBasis>, grid: &ModeSet, f: &[C64], g: &[C64]) -> Result<Accumulator> {
    let m = basis.n_modes();
    let ann: Vec<LinOp> = (0..m).map(|i| fock::annihilator(i, basis)).collect::<Result<_>>()?;
    let cre: Vec<LinOp> = (0..m).map(|i| fock::creator(i, basis)).collect::<Result<_>>()?;
    let zero = vec![ZERO; v.len()];
    let mut acc = Accumulator::default();
    for i in 0..m {
        for j in 0..m {
            let expect = if i == j { v.to_vec() } else { zero.clone() };
            acc.add(&commutator(&ann[i], &cre[j], v), &expect);
            acc.add(&commutator(&ann[i], &ann[j], v), &zero);
            acc.add(&commutator(&cre[i], &cre[j], v), &zero);
        }
    }
    let af = fock::smeared_annihilator(f, grid, basis)?;
    let ag = fock::smeared_annihilator(g, grid, basis)?;
    let cg = fock::smeared_creator(g, grid, basis)?;
    let cf = fock::smeared_creator(f, grid, basis)?;
    // (f, g) = Σ w_i conj(f_i) g_i
    let inner: C64 = (0..m).map(|i| grid.weights[i] * f[i].conj() * g[i]).sum();
    acc.add(&commutator(&af, &cg, v), &v.iter().map(|x| inner * x).collect::<Vec<_>>());
    acc.add(&commutator(&af, &ag, v), &zero);
    acc.add(&commutator(&cf, &cg, v), &zero);
    Ok(acc)
}

/// The ladder-operator identities and bounds as named reports, on seeded
/// random states:
///
/// * commutation relations on the vacuum and on a random state below the top layer;
/// * `|a(f)Ψ|² <= |K^{-1/2} f|² <Ψ, dΓ(K)Ψ>` and
///   `|a*(f)Ψ|² <= |K^{-1/2} f|² <Ψ, dΓ(K)Ψ> + |f|² |Ψ|²` over 200 draws of `Ψ`, `f`, `K > 0`;
/// * `[dΓ(K), a(f)] = -a(Kf)` and `[dΓ(K), a*(f)] = a*(Kf)` below the top layer.
pub fn ccr_and_bound_suite(basis: &Arc<FockBasis>, grid: &ModeSet, seed: u64) -> Result<Vec<RegularityReport>> {
    let m = basis.n_modes();
    if grid.len() != m {
        return Err(GsbError::DimensionMismatch(format!(
            "grid has {} modes for a basis over {m} modes",
            grid.len()
        )));
    }
    if basis.n_max() == 0 {
        return Err(GsbError::InvalidArgument(
            "commutation checks need n_max >= 1 (the vacuum is the top layer otherwise)".into(),
        ));
    }
    let meta = ReportMetadata {
        seed: Some(seed),
        nu: Some(grid.nu),
        ir_cutoff: Some(grid.ir_cutoff),
        ..fock_metadata(basis, 1)
    };
    let mut rng = linalg::seeded_rng(seed);
    let mut reports = Vec::new();

    let f = random_column(&mut rng, m);
    let g = random_column(&mut rng, m);
    let vacuum = StateVector::vacuum(&[C64::new(1.0, 0.0)], basis).amplitudes;
    reports.push(ccr_on(&vacuum, basis, grid, &f, &g)?.report("ccr_vacuum", 0.0, meta.clone()));

    let psi = random_interior(&mut rng, basis);
    reports.push(ccr_on(&psi, basis, grid, &f, &g)?.report("ccr_interior", 0.0, meta.clone()));

    let mut worst_ann: Option<(f64, f64, f64)> = None;
    let mut worst_cre: Option<(f64, f64, f64)> = None;
    let consider = |slot: &mut Option<(f64, f64, f64)>, bound: f64, value: f64| {
        let margin = (bound - value) / bound.max(value).max(1.0);
        if slot.is_none_or(|s| margin < s.0) {
            *slot = Some((margin, bound, value));
        }
    };
    for _ in 0..BOUND_DRAWS {
        let mut psi = linalg::random_vector(&mut rng, basis.dim());
        linalg::normalize(&mut psi);
        let f = random_column(&mut rng, m);
        let k: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..3.0)).collect();
        let dk = expectation(&psi, &fock::dgamma_diagonal(&k, basis)?);
        let kf: f64 = (0..m).map(|i| grid.weights[i] * f[i].norm_sqr() / k[i]).sum();
        let ff: f64 = (0..m).map(|i| grid.weights[i] * f[i].norm_sqr()).sum();
        let a = linalg::norm_sqr(&fock::smeared_annihilator(&f, grid, basis)?.apply_vec(&psi));
        let c = linalg::norm_sqr(&fock::smeared_creator(&f, grid, basis)?.apply_vec(&psi));
        consider(&mut worst_ann, kf * dk, a);
        consider(&mut worst_cre, kf * dk + ff, c);
    }
    for (name, worst) in [("annihilator_bound", worst_ann), ("creator_bound", worst_cre)] {
        let (margin, bound, value) = worst.expect("at least one draw");
        reports.push(
            RegularityReport::inequality(name, bound, value, 0.0, EXACT_TOL, meta.clone())
                .with_stat("draws", BOUND_DRAWS as f64)
                .with_stat("min_relative_margin", margin),
        );
    }

    let psi = random_interior(&mut rng, basis);
    let f = random_column(&mut rng, m);
    let k: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..3.0)).collect();
    let kf: Vec<C64> = f.iter().zip(&k).map(|(a, b)| a * b).collect();
    let dk = fock::dgamma(&k, basis)?;
    let mut acc = Accumulator::default();
    let lowered = fock::smeared_annihilator(&kf, grid, basis)?.apply_vec(&psi);
    acc.add(
        &commutator(&dk, &fock::smeared_annihilator(&f, grid, basis)?, &psi),
        &lowered.iter().map(|x| -x).collect::<Vec<_>>(),
    );
    acc.add(
        &commutator(&dk, &fock::smeared_creator(&f, grid, basis)?, &psi),
        &fock::smeared_creator(&kf, grid, basis)?.apply_vec(&psi),
    );
    reports.push(acc.report("dgamma_commutators", 0.0, meta));
    Ok(reports)
}
