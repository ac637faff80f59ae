use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{norm2, CsrMatrix, PrecondError, PrecondKind, Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Krylov dimension before restart.
    pub restart: usize,
    /// Relative residual tolerance `‖b - A x‖ / ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
    pub precond: PrecondKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restart: 50,
            tol: 1e-10,
            max_iter: 10_000,
            precond: PrecondKind::Ilut,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), GmresError> {
        if self.restart == 0 || !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(GmresError::InvalidConfig(*self));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// True relative residual of `solution`, recomputed from `A`.
    pub residual: f64,
    /// Relative residual estimate after each inner iteration; entry 0 is the initial residual.
    pub history: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmresError {
    #[error("invalid solver configuration {0:?}")]
    InvalidConfig(SolverConfig),
    #[error("system is {nrows} x {ncols} with right-hand side of length {rhs}")]
    DimensionMismatch {
        nrows: usize,
        ncols: usize,
        rhs: usize,
    },
    #[error("numerical breakdown in Arnoldi step {iteration}")]
    Breakdown { iteration: usize },
    #[error("GMRES stopped after {} iterations at relative residual {:e}", .0.iterations, .0.residual)]
    NotConverged(Box<GmresOutcome>),
    #[error(transparent)]
    Preconditioner(#[from] PrecondError),
}

struct Givens {
    c: f64,
    s: f64,
}

impl Givens {
    fn zeroing(a: f64, b: f64) -> Self {
        if b == 0.0 {
            return Self { c: 1.0, s: 0.0 };
        }
        let r = a.hypot(b);
        Self { c: a / r, s: b / r }
    }

    fn apply(&self, a: &mut f64, b: &mut f64) {
        let (x, y) = (*a, *b);
        *a = self.c * x + self.s * y;
        *b = -self.s * x + self.c * y;
    }
}

/// Restarted, right-preconditioned GMRES with modified Gram–Schmidt Arnoldi
/// and Givens rotations. With right preconditioning the minimized residual is
/// the true residual of the unpreconditioned system.
pub fn gmres_solve(
    a: &CsrMatrix,
    rhs: &[f64],
    config: &SolverConfig,
    precond: &dyn Preconditioner,
) -> Result<GmresOutcome, GmresError> {
    config.validate()?;
    let n = a.nrows();
    if a.ncols() != n || rhs.len() != n {
        return Err(GmresError::DimensionMismatch {
            nrows: n,
            ncols: a.ncols(),
            rhs: rhs.len(),
        });
    }
    let mut x = vec![0.0; n];
    let bnorm = norm2(rhs);
    if n == 0 || bnorm == 0.0 {
        return Ok(GmresOutcome {
            solution: x,
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }

    let m = config.restart.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    // Column-major Hessenberg: h[j] holds column j (length m + 1).
    let mut h = vec![vec![0.0; m + 1]; m];
    let mut rotations: Vec<Givens> = Vec::with_capacity(m);
    let mut g = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let ax = a.spmv(&x).expect("dimension checked");
        let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, p)| b - p).collect();
        let beta = norm2(&r);
        let rel = beta / bnorm;
        if history.is_empty() {
            history.push(rel);
        }
        if rel <= config.tol {
            return Ok(GmresOutcome {
                solution: x,
                iterations,
                residual: rel,
                history,
            });
        }
        if iterations >= config.max_iter {
            return Err(GmresError::NotConverged(Box::new(GmresOutcome {
                solution: x,
                iterations,
                residual: rel,
                history,
            })));
        }

        basis.clear();
        rotations.clear();
        r.iter_mut().for_each(|v| *v /= beta);
        basis.push(r);
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut cols = 0;
        let mut happy = false;

        for j in 0..m {
            precond.apply(&basis[j], &mut z);
            a.spmv_into(&z, &mut w).expect("dimension checked");
            let col = &mut h[j];
            col.iter_mut().for_each(|v| *v = 0.0);
            for (i, v) in basis.iter().enumerate() {
                let hij = super::dot(&w, v);
                col[i] = hij;
                w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let hnext = norm2(&w);
            col[j + 1] = hnext;
            if !hnext.is_finite() {
                return Err(GmresError::Breakdown {
                    iteration: iterations + 1,
                });
            }
            for (i, rot) in rotations.iter().enumerate() {
                let (lo, hi) = col.split_at_mut(i + 1);
                rot.apply(&mut lo[i], &mut hi[0]);
            }
            let rot = Givens::zeroing(col[j], col[j + 1]);
            {
                let (lo, hi) = col.split_at_mut(j + 1);
                rot.apply(&mut lo[j], &mut hi[0]);
            }
            {
                let (lo, hi) = g.split_at_mut(j + 1);
                rot.apply(&mut lo[j], &mut hi[0]);
            }
            rotations.push(rot);
            if col[j] == 0.0 {
                return Err(GmresError::Breakdown {
                    iteration: iterations + 1,
                });
            }
            iterations += 1;
            cols = j + 1;
            let est = g[j + 1].abs() / bnorm;
            history.push(est);
            // Invariant subspace reached: the Krylov solution is exact.
            if hnext <= 1e-14 * beta {
                happy = true;
                break;
            }
            if est <= config.tol || iterations >= config.max_iter {
                break;
            }
            let v: Vec<f64> = w.iter().map(|wk| wk / hnext).collect();
            basis.push(v);
        }

        // Back substitution for the rotated triangular system.
        let mut y = vec![0.0; cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= h[jj][i] * yj;
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (v, yi) in basis.iter().zip(&y) {
            update.iter_mut().zip(v).for_each(|(u, vk)| *u += yi * vk);
        }
        precond.apply(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);

        if happy {
            let residual = super::relative_residual(a, &x, rhs);
            return Ok(GmresOutcome {
                solution: x,
                iterations,
                residual,
                history,
            });
        }
    }
}

/// Convenience wrapper building the preconditioner named in `config`.
pub fn gmres_with_config(
    a: &CsrMatrix,
    rhs: &[f64],
    config: &SolverConfig,
) -> Result<GmresOutcome, GmresError> {
    let m = config.precond.build(a)?;
    gmres_solve(a, rhs, config, m.as_ref())
}
