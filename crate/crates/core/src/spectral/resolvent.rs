use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Preconditioner, SolverConfig};
use crate::error::{GsbError, Result};
use crate::fock::LinOp;
use crate::linalg::{self, C64};

/// Result of one shifted solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solve {
    #[serde(skip)]
    pub solution: Vec<C64>,
    pub iterations: usize,
    /// `|(H - E + s) u - v| / |v|`
    pub relative_residual: f64,
}

/// `(H - E + s)^-1` for shifts `s > 0`, where `E` is the ground energy of `H`.
///
/// The system is hermitian positive definite, so it is solved by conjugate
/// gradients (Jacobi-preconditioned when the config asks for diagonal scaling).
pub struct Resolvent<'a> {
    h: &'a LinOp,
    energy: f64,
    diag: Option<Vec<f64>>,
    cfg: SolverConfig,
}

impl<'a> Resolvent<'a> {
    pub fn new(h: &'a LinOp, energy: f64, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if !h.is_hermitian() {
            return Err(GsbError::NotHermitian {
                name: "resolvent operator".into(),
                deviation: f64::NAN,
            });
        }
        let diag = (cfg.preconditioner == Preconditioner::Diagonal)
            .then(|| h.diagonal_entries().iter().map(|v| v.re).collect());
        Ok(Resolvent {
            h,
            energy,
            diag,
            cfg: cfg.clone(),
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    fn shifted_apply(&self, shift: f64, x: &[C64], y: &mut [C64]) {
        self.h.apply(x, y);
        let c = shift - self.energy;
        y.par_iter_mut().zip(x.par_iter()).for_each(|(a, b)| *a += c * b);
    }

    pub fn solve(&self, shift: f64, v: &[C64]) -> Result<Solve> {
        self.solve_from(shift, v, None)
    }

    /// Solves `(H - E + shift) u = v`, starting from `guess` when given.
    pub fn solve_from(&self, shift: f64, v: &[C64], guess: Option<&[C64]>) -> Result<Solve> {
        if !(shift > 0.0) || !shift.is_finite() {
            return Err(GsbError::NonPositiveShift(shift));
        }
        let n = self.h.dim();
        if v.len() != n {
            return Err(GsbError::DimensionMismatch(format!(
                "right-hand side has length {} for operator dimension {n}",
                v.len()
            )));
        }
        let vnorm = linalg::norm(v);
        if vnorm == 0.0 {
            return Ok(Solve {
                solution: vec![C64::new(0.0, 0.0); n],
                iterations: 0,
                relative_residual: 0.0,
            });
        }
        let target = self.cfg.cg_tol * vnorm;
        let inv_m: Option<Vec<f64>> = self.diag.as_ref().map(|d| {
            d.par_iter()
                .map(|di| 1.0 / (di - self.energy + shift).max(shift))
                .collect()
        });
        let precond = |r: &[C64]| -> Vec<C64> {
            match &inv_m {
                Some(m) => r.par_iter().zip(m.par_iter()).map(|(a, b)| a * b).collect(),
                None => r.to_vec(),
            }
        };

        let mut x = match guess {
            Some(g) if g.len() == n => g.to_vec(),
            _ => vec![C64::new(0.0, 0.0); n],
        };
        let mut ap = vec![C64::new(0.0, 0.0); n];
        self.shifted_apply(shift, &x, &mut ap);
        let mut r: Vec<C64> = v.iter().zip(&ap).map(|(a, b)| a - b).collect();
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = linalg::dot(&r, &z).re;
        let mut best = linalg::norm(&r);
        let mut iterations = 0;
        loop {
            let rn = linalg::norm(&r);
            best = best.min(rn);
            if rn <= target {
                // recompute the true residual before accepting
                self.shifted_apply(shift, &x, &mut ap);
                let tr: Vec<C64> = v.iter().zip(&ap).map(|(a, b)| a - b).collect();
                let trn = linalg::norm(&tr);
                if trn <= target {
                    return Ok(Solve {
                        solution: x,
                        iterations,
                        relative_residual: trn / vnorm,
                    });
                }
                r = tr;
                z = precond(&r);
                p = z.clone();
                rz = linalg::dot(&r, &z).re;
            }
            if iterations >= self.cfg.cg_max {
                return Err(GsbError::NonConverged {
                    what: "shifted conjugate gradient",
                    iterations,
                    residual: best / vnorm,
                });
            }
            self.shifted_apply(shift, &p, &mut ap);
            let pap = linalg::dot(&p, &ap).re;
            if !(pap > 0.0) {
                return Err(GsbError::InvalidArgument(format!(
                    "H - E + {shift} is not positive definite (p^H A p = {pap:.3e}); is E the ground energy?"
                )));
            }
            let a = C64::new(rz / pap, 0.0);
            linalg::axpy(a, &p, &mut x);
            linalg::axpy(-a, &ap, &mut r);
            z = precond(&r);
            let rz_new = linalg::dot(&r, &z).re;
            let beta = C64::new(rz_new / rz, 0.0);
            rz = rz_new;
            p.par_iter_mut().zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
            iterations += 1;
        }
    }
}

/// `u` with `|(H - E + s) u - v| <= cg_tol |v|`.
pub fn resolvent_apply(h: &LinOp, energy: f64, shift: f64, v: &[C64], cfg: &SolverConfig) -> Result<Solve> {
    Resolvent::new(h, energy, cfg)?.solve(shift, v)
}

/// Element-wise `resolvent_apply` over `(shift, vector)` pairs.
///
/// Each solve runs sequentially on its own buffers, so the results do not
/// depend on `parallel`.
pub fn batched_resolvent(
    h: &LinOp,
    energy: f64,
    items: &[(f64, Vec<C64>)],
    cfg: &SolverConfig,
    parallel: bool,
) -> Result<Vec<Solve>> {
    let res = Resolvent::new(h, energy, cfg)?;
    let run = |(index, (s, v)): (usize, &(f64, Vec<C64>))| {
        res.solve(*s, v).map_err(|e| GsbError::BatchItem {
            index,
            source: Box::new(e),
        })
    };
    if parallel {
        items.par_iter().enumerate().map(run).collect()
    } else {
        items.iter().enumerate().map(run).collect()
    }
}
