//! Generalized spin-boson Hamiltonians
//! `H = A ⊗ 1 + 1 ⊗ dΓ(ω) + α Σ_j B_j ⊗ φ(λ_j)` on `C^d ⊗ F_trunc`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GsbError, Result};
use crate::fock::{self, FockBasis, LinOp, DEFAULT_MAX_DIM, DEFAULT_SPARSE_THRESHOLD};
use crate::linalg::{self, C64};
use crate::modes::{self, ModeSet};
use crate::spectral::{self, GroundState, SolverConfig};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssembleOptions {
    pub max_dim: usize,
    /// Operators of at most this dimension are stored sparsely.
    pub sparse_threshold: usize,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            max_dim: DEFAULT_MAX_DIM,
            sparse_threshold: DEFAULT_SPARSE_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GsbModel {
    pub a: DMatrix<C64>,
    pub b: Vec<DMatrix<C64>>,
    pub grid: ModeSet,
    pub alpha: f64,
    pub n_max: usize,
    pub basis: Arc<FockBasis>,
    /// `A ⊗ 1 + 1 ⊗ dΓ(ω)`
    pub h0: LinOp,
    /// `Σ_j B_j ⊗ φ(λ_j)`
    pub hi: LinOp,
    pub h: LinOp,
    /// Lowest eigenvalue of `A`.
    pub e_a: f64,
}

/// Matter part of the van Hove model: `d = 1`, `A = 0`, `B = [1]`.
pub fn van_hove_matter() -> (DMatrix<C64>, Vec<DMatrix<C64>>) {
    (DMatrix::zeros(1, 1), vec![DMatrix::identity(1, 1)])
}

/// Two-level matter part `A = (Δ/2) σ_z + (ε/2) σ_x`, shifted so that its
/// lowest eigenvalue is 0, with `B = [σ_x]`.
pub fn spin_boson_matter(delta: f64, bias: f64) -> (DMatrix<C64>, Vec<DMatrix<C64>>) {
    let c = |v: f64| C64::new(v, 0.0);
    let raw = DMatrix::from_row_slice(2, 2, &[c(delta / 2.0), c(bias / 2.0), c(bias / 2.0), c(-delta / 2.0)]);
    let shift = (delta * delta + bias * bias).sqrt() / 2.0;
    let a = raw + DMatrix::identity(2, 2) * c(shift);
    let sx = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    (a, vec![sx])
}

/// Named matter parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PresetRepr", into = "PresetRepr")]
pub enum MatterPreset {
    VanHove,
    SpinBoson2Level { delta: f64, bias: f64 },
    /// Explicit real symmetric `A` and `B_j`, row-major.
    GsbCustom { a: Vec<Vec<f64>>, b: Vec<Vec<Vec<f64>>> },
}

// Serde ignores extra keys next to the tag of a unit variant, so the wire
// form uses an empty struct variant instead.
#[derive(Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
enum PresetRepr {
    VanHove {},
    #[serde(rename = "spin_boson_2level")]
    SpinBoson2Level {
        delta: f64,
        #[serde(default)]
        bias: f64,
    },
    GsbCustom { a: Vec<Vec<f64>>, b: Vec<Vec<Vec<f64>>> },
}

impl From<PresetRepr> for MatterPreset {
    fn from(r: PresetRepr) -> Self {
        match r {
            PresetRepr::VanHove {} => MatterPreset::VanHove,
            PresetRepr::SpinBoson2Level { delta, bias } => MatterPreset::SpinBoson2Level { delta, bias },
            PresetRepr::GsbCustom { a, b } => MatterPreset::GsbCustom { a, b },
        }
    }
}

impl From<MatterPreset> for PresetRepr {
    fn from(m: MatterPreset) -> Self {
        match m {
            MatterPreset::VanHove => PresetRepr::VanHove {},
            MatterPreset::SpinBoson2Level { delta, bias } => PresetRepr::SpinBoson2Level { delta, bias },
            MatterPreset::GsbCustom { a, b } => PresetRepr::GsbCustom { a, b },
        }
    }
}

impl MatterPreset {
    pub fn matrices(&self) -> Result<(DMatrix<C64>, Vec<DMatrix<C64>>)> {
        match self {
            MatterPreset::VanHove => Ok(van_hove_matter()),
            MatterPreset::SpinBoson2Level { delta, bias } => {
                if !delta.is_finite() || !bias.is_finite() {
                    return Err(GsbError::InvalidArgument("delta and bias must be finite".into()));
                }
                Ok(spin_boson_matter(*delta, *bias))
            }
            MatterPreset::GsbCustom { a, b } => {
                let am = square("A", a)?;
                let bm = b
                    .iter()
                    .enumerate()
                    .map(|(j, rows)| square(&format!("B_{j}"), rows))
                    .collect::<Result<_>>()?;
                Ok((am, bm))
            }
        }
    }

    pub fn is_van_hove(&self) -> bool {
        matches!(self, MatterPreset::VanHove)
    }

    /// Number of coupling channels the preset expects.
    pub fn n_channels(&self) -> usize {
        match self {
            MatterPreset::GsbCustom { b, .. } => b.len(),
            _ => 1,
        }
    }
}

fn square(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<C64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(GsbError::DimensionMismatch(format!("{name} must be a non-empty square matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GsbError::InvalidArgument(format!("{name} has non-finite entries")));
    }
    Ok(linalg::to_complex_matrix(rows))
}

/// Closed-form ground-state data of the van Hove model
/// `dΓ(ω) + α φ(λ)`, solved by a coherent displacement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanHoveOracle {
    pub energy: f64,
    pub number: f64,
    /// `<a_i>` in the ground state, per mode.
    pub a_expectation: Vec<f64>,
}

/// Uses channel 0 of the grid.
pub fn van_hove_oracle(grid: &ModeSet, alpha: f64) -> VanHoveOracle {
    let lam = grid.lambda(0);
    let mut energy = 0.0;
    let mut number = 0.0;
    let mut a_expectation = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (l, w, o) = (lam[i], grid.weights[i], grid.omega[i]);
        energy -= alpha * alpha * l * l * w / (2.0 * o);
        number += alpha * alpha * l * l * w / (2.0 * o * o);
        a_expectation.push(-alpha * l * w.sqrt() / (std::f64::consts::SQRT_2 * o));
    }
    VanHoveOracle {
        energy,
        number,
        a_expectation,
    }
}

impl GsbModel {
    pub fn assemble(
        a: DMatrix<C64>,
        b: Vec<DMatrix<C64>>,
        grid: ModeSet,
        alpha: f64,
        n_max: usize,
    ) -> Result<Self> {
        Self::assemble_with(a, b, grid, alpha, n_max, AssembleOptions::default())
    }

    pub fn assemble_with(
        a: DMatrix<C64>,
        b: Vec<DMatrix<C64>>,
        grid: ModeSet,
        alpha: f64,
        n_max: usize,
        opts: AssembleOptions,
    ) -> Result<Self> {
        let d = a.nrows();
        if d == 0 || a.ncols() != d {
            return Err(GsbError::DimensionMismatch(format!(
                "matter Hamiltonian must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let dev = linalg::hermitian_deviation(&a);
        if dev > HERMITIAN_TOL {
            return Err(GsbError::NotHermitian {
                name: "A".into(),
                deviation: dev,
            });
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.nrows() != d || bj.ncols() != d {
                return Err(GsbError::DimensionMismatch(format!(
                    "B_{j} is {}x{} but A is {d}x{d}",
                    bj.nrows(),
                    bj.ncols()
                )));
            }
            let dev = linalg::hermitian_deviation(bj);
            if dev > HERMITIAN_TOL {
                return Err(GsbError::NotHermitian {
                    name: format!("B_{j}"),
                    deviation: dev,
                });
            }
        }
        grid.validate()?;
        if grid.n_channels() != b.len() {
            return Err(GsbError::DimensionMismatch(format!(
                "{} coupling channels for {} interaction operators",
                grid.n_channels(),
                b.len()
            )));
        }
        if !alpha.is_finite() {
            return Err(GsbError::InvalidArgument("alpha must be finite".into()));
        }
        let basis = Arc::new(FockBasis::with_max_dim(grid.len(), n_max, opts.max_dim / d)?);
        let fd = basis.dim();
        let (e_vals, _) = linalg::hermitian_eigen(&a);
        let e_a = e_vals[0];

        let h0 = LinOp::sum(vec![
            fock::matter_only(a.clone(), fd),
            fock::fock_only(d, fock::dgamma(&grid.omega, &basis)?),
        ]);
        let mut terms = Vec::with_capacity(b.len());
        for (j, bj) in b.iter().enumerate() {
            let phi = fock::field(grid.lambda(j), &grid, &basis)?.cached(opts.sparse_threshold);
            terms.push(fock::tensor(bj.clone(), phi));
        }
        let hi = if terms.is_empty() {
            LinOp::zero(d * fd)
        } else {
            LinOp::sum(terms).assume_hermitian()
        };
        let h = LinOp::sum(vec![h0.clone(), hi.clone().scaled(C64::new(alpha, 0.0))])
            .assume_hermitian()
            .cached(opts.sparse_threshold);
        Ok(GsbModel {
            a,
            b,
            grid,
            alpha,
            n_max,
            basis,
            h0,
            hi,
            h,
            e_a,
        })
    }

    pub fn matter_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn n_modes(&self) -> usize {
        self.grid.len()
    }

    /// Matter part of `T(k_i)`: `2^{-1/2} Σ_j λ_j(k_i) B_j`.
    pub fn t_matrix(&self, i: usize) -> DMatrix<C64> {
        let d = self.matter_dim();
        let mut t = DMatrix::zeros(d, d);
        for (j, bj) in self.b.iter().enumerate() {
            t += bj * C64::new(self.grid.lambda(j)[i] * std::f64::consts::FRAC_1_SQRT_2, 0.0);
        }
        t
    }

    /// `T(k_i) = 2^{-1/2} (Σ_j λ_j(k_i) B_j) ⊗ 1`, fixed by
    /// `[1 ⊗ a_i, H_I] = sqrt(w_i) T(k_i)` below the top layer.
    pub fn t_operator(&self, i: usize) -> Result<LinOp> {
        if i >= self.n_modes() {
            return Err(GsbError::InvalidArgument(format!(
                "mode index {i} out of range ({} modes)",
                self.n_modes()
            )));
        }
        Ok(fock::matter_only(self.t_matrix(i), self.basis.dim()))
    }

    /// `(T(k_i) ⊗ 1) v`, applied block-wise.
    pub fn apply_t(&self, i: usize, v: &[C64]) -> Vec<C64> {
        apply_matter(&self.t_matrix(i), self.basis.dim(), v)
    }

    /// `(M ⊗ 1) v` for a matter operator `M`.
    pub fn apply_matter(&self, m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
        apply_matter(m, self.basis.dim(), v)
    }

    /// `1 ⊗ a_i`
    pub fn annihilator(&self, i: usize) -> Result<LinOp> {
        Ok(fock::fock_only(self.matter_dim(), fock::annihilator(i, &self.basis)?))
    }

    /// `1 ⊗ a(f)`
    pub fn smeared_annihilator(&self, f: &[C64]) -> Result<LinOp> {
        Ok(fock::fock_only(
            self.matter_dim(),
            fock::smeared_annihilator(f, &self.grid, &self.basis)?,
        ))
    }

    /// Diagonal of `1 ⊗ dΓ(g)` over the full space.
    pub fn dgamma_diagonal(&self, g: &[f64]) -> Result<Vec<f64>> {
        let fd = fock::dgamma_diagonal(g, &self.basis)?;
        Ok((0..self.matter_dim()).flat_map(|_| fd.iter().cloned()).collect())
    }

    pub fn top_weight(&self, v: &[C64]) -> f64 {
        fock::top_weight(v, &self.basis)
    }

    /// Lowest eigenpair of `H`, with its top-layer weight filled in.
    pub fn ground_state(&self, cfg: &SolverConfig) -> Result<GroundState> {
        let mut gs = spectral::ground_state(&self.h, cfg)?;
        gs.w_top = Some(self.top_weight(&gs.vector));
        Ok(gs)
    }

    /// `|(H - E + ω_i)(1 ⊗ a_i) φ + α sqrt(w_i) T(k_i) φ|`, which vanishes up to
    /// the top-layer failure of the commutation relations.
    pub fn pullthrough_precursor(&self, gs: &GroundState, i: usize) -> Result<f64> {
        let ai = self.annihilator(i)?.apply_vec(&gs.vector);
        let mut out = self.h.apply_vec(&ai);
        let c = self.grid.omega[i] - gs.energy;
        let tphi = self.apply_t(i, &gs.vector);
        let k = self.alpha * self.grid.weights[i].sqrt();
        for ((o, a), t) in out.iter_mut().zip(&ai).zip(&tphi) {
            *o += c * a + k * t;
        }
        Ok(linalg::norm(&out))
    }

    /// Largest `|α|` admitted by the relative bounds `|B_j f| <= a_j |(A - E_A)^{1/2} f| + b_j |f|`:
    /// `(Σ_j a_j |λ_j / sqrt ω|^2)^{-1}`, infinite when the sum vanishes.
    pub fn coupling_budget(&self, relative_bounds: &[f64]) -> Result<f64> {
        if relative_bounds.len() != self.b.len() {
            return Err(GsbError::DimensionMismatch(format!(
                "{} relative-bound constants for {} channels",
                relative_bounds.len(),
                self.b.len()
            )));
        }
        if relative_bounds.iter().any(|a| !(*a >= 0.0)) {
            return Err(GsbError::InvalidArgument("relative-bound constants must be >= 0".into()));
        }
        let mut denom = 0.0;
        for (j, a) in relative_bounds.iter().enumerate() {
            if *a > 0.0 {
                denom += a * modes::l2_criteria(&self.grid, j)?.norm_lam_over_sqrtw;
            }
        }
        Ok(if denom == 0.0 { f64::INFINITY } else { 1.0 / denom })
    }

    /// Operator norms `|B_j|`, used as a stand-in for the relative-bound constants.
    pub fn interaction_norms(&self) -> Vec<f64> {
        self.b.iter().map(linalg::spectral_norm).collect()
    }
}

fn apply_matter(m: &DMatrix<C64>, fd: usize, v: &[C64]) -> Vec<C64> {
    let d = m.nrows();
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for a in 0..d {
        for b in 0..d {
            let c = m[(a, b)];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let src = &v[b * fd..(b + 1) * fd];
            for (o, s) in out[a * fd..(a + 1) * fd].iter_mut().zip(src) {
                *o += c * s;
            }
        }
    }
    out
}
