//! Sparse linear algebra: CSR storage, restarted GMRES with Jacobi or ILU(0)
//! preconditioning, and banded/dense LU used as a direct oracle.

mod csr;
mod direct;
mod gmres;
mod precond;

pub use csr::{CsrMatrix, SparseError};
pub use direct::{direct_solve, DirectError, DirectSolve, DENSE_LIMIT, DIRECT_DIMENSION_LIMIT};
pub use gmres::{gmres_solve, gmres_with_config, GmresError, GmresOutcome, SolverConfig};
pub use precond::{
    ilu0_factor, ilut_factor, ilut_fill, Identity, Ilu0, Ilut, Jacobi, PrecondError, PrecondKind,
    Preconditioner, ILUT_DROP_TOL, ILUT_MIN_FILL,
};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖A x - b‖₂ / ‖b‖₂` (or the absolute residual when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.spmv(x).expect("dimensions checked by caller");
    let r: f64 = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    let nb = norm2(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}
