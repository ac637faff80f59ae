use thiserror::Error;

use super::CsrMatrix;

/// Largest system handed to the direct solver.
pub const DIRECT_DIMENSION_LIMIT: usize = 70_000;
/// Systems up to this size use dense LU; larger ones use banded LU.
pub const DENSE_LIMIT: usize = 2_500;
/// Cap on band storage (`n * (2 kl + ku + 1)` doubles, about 1.6 GB).
const BAND_STORAGE_LIMIT: usize = 200_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirectError {
    #[error("system of dimension {dimension} with bandwidths ({lower}, {upper}) exceeds the direct-solver guard")]
    TooLarge {
        dimension: usize,
        lower: usize,
        upper: usize,
    },
    #[error("matrix is singular (zero pivot in column {0})")]
    Singular(usize),
    #[error("system is {nrows} x {ncols} with right-hand side of length {rhs}")]
    DimensionMismatch {
        nrows: usize,
        ncols: usize,
        rhs: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectSolve {
    pub solution: Vec<f64>,
    /// `‖A x - b‖₂ / ‖b‖₂`.
    pub residual: f64,
}

/// Gaussian elimination with partial pivoting, dense for small systems and
/// banded (LAPACK `gbtrf` layout) otherwise.
pub fn direct_solve(a: &CsrMatrix, rhs: &[f64]) -> Result<DirectSolve, DirectError> {
    let n = a.nrows();
    if a.ncols() != n || rhs.len() != n {
        return Err(DirectError::DimensionMismatch {
            nrows: n,
            ncols: a.ncols(),
            rhs: rhs.len(),
        });
    }
    let (lower, upper) = a.bandwidths();
    if n > DIRECT_DIMENSION_LIMIT
        || (n > DENSE_LIMIT && n.saturating_mul(2 * lower + upper + 1) > BAND_STORAGE_LIMIT)
    {
        return Err(DirectError::TooLarge {
            dimension: n,
            lower,
            upper,
        });
    }
    let solution = if n <= DENSE_LIMIT {
        dense_lu_solve(a, rhs)?
    } else {
        banded_lu_solve(a, rhs, lower, upper)?
    };
    let residual = super::relative_residual(a, &solution, rhs);
    Ok(DirectSolve { solution, residual })
}

fn dense_lu_solve(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, DirectError> {
    let n = a.nrows();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            m[i * n + j] = v;
        }
    }
    let mut b = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| m[p * n + col].abs().total_cmp(&m[q * n + col].abs()))
            .unwrap();
        if m[piv * n + col] == 0.0 {
            return Err(DirectError::Singular(col));
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = m[col * n + col];
        let (top, bottom) = m.split_at_mut((col + 1) * n);
        let pivot_row = &top[col * n..];
        for r in 0..n - col - 1 {
            let row = &mut bottom[r * n..(r + 1) * n];
            let l = row[col] / d;
            if l != 0.0 {
                for j in col + 1..n {
                    row[j] -= l * pivot_row[j];
                }
                b[col + 1 + r] -= l * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / m[i * n + i];
    }
    Ok(x)
}

/// Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl` upper
/// diagonals hold fill from row interchanges.
fn banded_lu_solve(
    a: &CsrMatrix,
    rhs: &[f64],
    kl: usize,
    ku: usize,
) -> Result<Vec<f64>, DirectError> {
    let n = a.nrows();
    let width = 2 * kl + ku + 1;
    let uw = ku + kl; // upper width after pivoting
    let mut band = vec![0.0; n * width];
    let idx = |i: usize, j: usize| i * width + (j + kl - i);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            band[idx(i, j)] = v;
        }
    }
    let mut b = rhs.to_vec();
    let mut pivots = vec![0usize; n];
    for j in 0..n {
        let last_row = (j + kl).min(n - 1);
        let mut piv = j;
        let mut best = band[idx(j, j)].abs();
        for r in j + 1..=last_row {
            let v = band[idx(r, j)].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(DirectError::Singular(j));
        }
        pivots[j] = piv;
        let last_col = (j + uw).min(n - 1);
        if piv != j {
            for c in j..=last_col {
                band.swap(idx(j, c), idx(piv, c));
            }
        }
        let d = band[idx(j, j)];
        let span = last_col - j;
        for r in j + 1..=last_row {
            let l = band[idx(r, j)] / d;
            band[idx(r, j)] = l;
            if l != 0.0 {
                let (src, dst) = (idx(j, j + 1), idx(r, j + 1));
                // Rows r > j never alias row j in the flat buffer.
                let (head, tail) = band.split_at_mut(dst);
                let pivot_row = &head[src..src + span];
                for (t, p) in tail[..span].iter_mut().zip(pivot_row) {
                    *t -= l * p;
                }
            }
        }
    }
    for j in 0..n {
        let piv = pivots[j];
        if piv != j {
            b.swap(j, piv);
        }
        let bj = b[j];
        for r in j + 1..=(j + kl).min(n - 1) {
            b[r] -= band[idx(r, j)] * bj;
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let last_col = (i + uw).min(n - 1);
        let mut s = b[i];
        for c in i + 1..=last_col {
            s -= band[idx(i, c)] * x[c];
        }
        x[i] = s / band[idx(i, i)];
    }
    Ok(x)
}
