use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrecondError {
    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },
    #[error("matrix row {row} has no diagonal entry")]
    MissingDiagonal { row: usize },
    #[error("preconditioner needs a square matrix, got {nrows} x {ncols}")]
    NotSquare { nrows: usize, ncols: usize },
}

/// Approximate inverse applied as `z = M⁻¹ r`.
pub trait Preconditioner: Send + Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self, PrecondError> {
        let inv_diag = a
            .diagonal()
            .iter()
            .enumerate()
            .map(|(row, &d)| {
                if d == 0.0 {
                    Err(PrecondError::ZeroPivot { row })
                } else {
                    Ok(1.0 / d)
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { inv_diag })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * d;
        }
    }
}

/// Incomplete LU factorization restricted to the sparsity pattern of `A`.
/// `L` (unit diagonal, strictly lower part) and `U` share one CSR value array.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    factors: CsrMatrix,
    lu: Vec<f64>,
    diag_pos: Vec<usize>,
}

pub fn ilu0_factor(a: &CsrMatrix) -> Result<Ilu0, PrecondError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(PrecondError::NotSquare {
            nrows: n,
            ncols: a.ncols(),
        });
    }
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let mut lu = a.values().to_vec();
    let mut diag_pos = vec![0; n];
    for i in 0..n {
        let (c, _) = a.row(i);
        diag_pos[i] = offsets[i]
            + c.binary_search(&i)
                .map_err(|_| PrecondError::MissingDiagonal { row: i })?;
    }
    // Position of column j within the current row, usize::MAX if absent.
    let mut where_in_row = vec![usize::MAX; n];
    for i in 0..n {
        let (start, end) = (offsets[i], offsets[i + 1]);
        for p in start..end {
            where_in_row[cols[p]] = p;
        }
        for p in start..diag_pos[i] {
            let k = cols[p];
            let pivot = lu[diag_pos[k]];
            if pivot == 0.0 {
                return Err(PrecondError::ZeroPivot { row: k });
            }
            let lik = lu[p] / pivot;
            lu[p] = lik;
            for q in diag_pos[k] + 1..offsets[k + 1] {
                let w = where_in_row[cols[q]];
                if w != usize::MAX {
                    lu[w] -= lik * lu[q];
                }
            }
        }
        if lu[diag_pos[i]] == 0.0 {
            return Err(PrecondError::ZeroPivot { row: i });
        }
        for p in start..end {
            where_in_row[cols[p]] = usize::MAX;
        }
    }
    Ok(Ilu0 {
        factors: a.clone(),
        lu,
        diag_pos,
    })
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag_pos.len();
        let offsets = self.factors.row_offsets();
        let cols = self.factors.col_indices();
        for i in 0..n {
            let mut s = r[i];
            for p in offsets[i]..self.diag_pos[i] {
                s -= self.lu[p] * z[cols[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag_pos[i] + 1..offsets[i + 1] {
                s -= self.lu[p] * z[cols[p]];
            }
            z[i] = s / self.lu[self.diag_pos[i]];
        }
    }
}

/// Drop tolerance (relative to the row 2-norm) used by [`PrecondKind::Ilut`].
pub const ILUT_DROP_TOL: f64 = 1e-6;
/// Lower bound on the entries kept per row in each of `L` and `U`.
pub const ILUT_MIN_FILL: usize = 30;

/// Fill limit for [`PrecondKind::Ilut`]: one matrix bandwidth, so that a
/// whole grid line of coupling can be retained.
pub fn ilut_fill(a: &CsrMatrix) -> usize {
    let (lower, upper) = a.bandwidths();
    ILUT_MIN_FILL.max(lower.max(upper) + 1)
}

/// Threshold incomplete LU with fill limit (dual dropping). Rows of `L`
/// (unit diagonal, stored without it) and `U` (diagonal first) are kept apart.
#[derive(Debug, Clone)]
pub struct Ilut {
    l: CsrMatrix,
    u: CsrMatrix,
}

struct RowBuilder {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl RowBuilder {
    fn new(n: usize) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        Self {
            offsets,
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push_row(&mut self, mut entries: Vec<(usize, f64)>) {
        entries.sort_unstable_by_key(|e| e.0);
        for (c, v) in entries {
            self.cols.push(c);
            self.vals.push(v);
        }
        self.offsets.push(self.cols.len());
    }

    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    fn finish(self, n: usize) -> CsrMatrix {
        CsrMatrix::from_csr_parts(n, n, self.offsets, self.cols, self.vals)
    }
}

/// Keeps the `p` entries of largest magnitude.
fn keep_largest(mut entries: Vec<(usize, f64)>, p: usize) -> Vec<(usize, f64)> {
    if entries.len() > p {
        entries.select_nth_unstable_by(p, |a, b| b.1.abs().total_cmp(&a.1.abs()));
        entries.truncate(p);
    }
    entries
}

pub fn ilut_factor(a: &CsrMatrix, drop_tol: f64, fill: usize) -> Result<Ilut, PrecondError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = a.nrows();
    if a.ncols() != n {
        return Err(PrecondError::NotSquare {
            nrows: n,
            ncols: a.ncols(),
        });
    }
    let mut l = RowBuilder::new(n);
    let mut u = RowBuilder::new(n);
    let mut w = vec![0.0; n];
    let mut in_row = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();
    let mut lower: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let norm = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tau = drop_tol * norm;
        for (&c, &v) in cols.iter().zip(vals) {
            w[c] = v;
            in_row[c] = true;
            pattern.push(c);
            if c < i {
                lower.push(Reverse(c));
            }
        }
        if !in_row[i] {
            return Err(PrecondError::MissingDiagonal { row: i });
        }
        let mut l_row = Vec::new();
        while let Some(Reverse(k)) = lower.pop() {
            let (ucols, uvals) = u.row(k);
            let lik = w[k] / uvals[0];
            w[k] = 0.0;
            if lik.abs() < tau {
                continue;
            }
            l_row.push((k, lik));
            for (&j, &ukj) in ucols.iter().zip(uvals).skip(1) {
                if !in_row[j] {
                    in_row[j] = true;
                    pattern.push(j);
                    if j < i {
                        lower.push(Reverse(j));
                    }
                }
                w[j] -= lik * ukj;
            }
        }
        let mut diag = w[i];
        if diag.abs() <= f64::EPSILON * norm {
            // Cancelled pivot: substitute a small multiple of the row norm.
            if norm == 0.0 {
                return Err(PrecondError::ZeroPivot { row: i });
            }
            diag = (drop_tol + 1e-4) * norm;
        }
        let upper: Vec<(usize, f64)> = pattern
            .iter()
            .filter(|&&j| j > i && w[j].abs() >= tau)
            .map(|&j| (j, w[j]))
            .collect();
        let mut u_row = keep_largest(upper, fill);
        u_row.push((i, diag));
        l.push_row(keep_largest(l_row, fill));
        u.push_row(u_row);
        for &j in &pattern {
            w[j] = 0.0;
            in_row[j] = false;
        }
        pattern.clear();
    }
    Ok(Ilut {
        l: l.finish(n),
        u: u.finish(n),
    })
}

impl Ilut {
    pub fn nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz()
    }
}

impl Preconditioner for Ilut {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        for i in 0..n {
            let (cols, vals) = self.l.row(i);
            let mut s = r[i];
            for (&c, &v) in cols.iter().zip(vals) {
                s -= v * z[c];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let (cols, vals) = self.u.row(i);
            // Diagonal is the first stored entry of each U row.
            let mut s = z[i];
            for (&c, &v) in cols.iter().zip(vals).skip(1) {
                s -= v * z[c];
            }
            z[i] = s / vals[0];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    None,
    Jacobi,
    Ilu0,
    /// Threshold ILU with `ILUT_DROP_TOL` and [`ilut_fill`].
    #[default]
    Ilut,
}

impl PrecondKind {
    pub fn build(self, a: &CsrMatrix) -> Result<Box<dyn Preconditioner>, PrecondError> {
        Ok(match self {
            PrecondKind::None => Box::new(Identity),
            PrecondKind::Jacobi => Box::new(Jacobi::new(a)?),
            PrecondKind::Ilu0 => Box::new(ilu0_factor(a)?),
            PrecondKind::Ilut => Box::new(ilut_factor(a, ILUT_DROP_TOL, ilut_fill(a))?),
        })
    }
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecondKind::None => "none",
            PrecondKind::Jacobi => "jacobi",
            PrecondKind::Ilu0 => "ilu0",
            PrecondKind::Ilut => "ilut",
        })
    }
}

impl FromStr for PrecondKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PrecondKind::None),
            "jacobi" => Ok(PrecondKind::Jacobi),
            "ilu0" => Ok(PrecondKind::Ilu0),
            "ilut" => Ok(PrecondKind::Ilut),
            other => Err(format!("unknown preconditioner '{other}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::direct_solve;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64 * 0.1));
            if i > 0 {
                t.push((i, i - 1, -1.0 - 0.01 * i as f64));
            }
            if i + 1 < n {
                t.push((i, i + 1, -2.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn diagonal_matrix_is_inverted_exactly() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        let ilu = ilu0_factor(&a).unwrap();
        let mut z = vec![0.0; 2];
        ilu.apply(&[1.0, 1.0], &mut z);
        assert_eq!(z, vec![0.5, 0.25]);
    }

    #[test]
    fn tridiagonal_ilu_is_exact_lu() {
        let a = tridiag(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let ilu = ilu0_factor(&a).unwrap();
        let mut z = vec![0.0; 40];
        ilu.apply(&b, &mut z);
        let direct = direct_solve(&a, &b).unwrap();
        for (p, q) in z.iter().zip(&direct.solution) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_reports_row() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(ilu0_factor(&a).unwrap_err(), PrecondError::ZeroPivot { row: 1 });
        let b = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(
            ilu0_factor(&b).unwrap_err(),
            PrecondError::MissingDiagonal { row: 1 }
        );
    }

    #[test]
    fn jacobi_scales_by_diagonal() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 5.0]]);
        let j = Jacobi::new(&a).unwrap();
        let mut z = vec![0.0; 2];
        j.apply(&[2.0, 5.0], &mut z);
        assert_eq!(z, vec![1.0, 1.0]);
    }

    fn random_dominant(n: usize, seed: u64) -> CsrMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            let mut off = 0.0;
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    off += v.abs();
                    t.push((i, j, v));
                }
            }
            t.push((i, i, off + 1.0));
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn ilut_without_dropping_is_exact() {
        let a = random_dominant(60, 3);
        let b: Vec<f64> = (0..60).map(|i| (i as f64 * 0.3).cos()).collect();
        let f = ilut_factor(&a, 0.0, 60).unwrap();
        let mut z = vec![0.0; 60];
        f.apply(&b, &mut z);
        let direct = direct_solve(&a, &b).unwrap();
        for (p, q) in z.iter().zip(&direct.solution) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn ilut_respects_fill_limit() {
        let a = random_dominant(200, 5);
        let f = ilut_factor(&a, 0.0, 3).unwrap();
        // At most 3 entries per row in L and 3 + diagonal in U.
        assert!(f.nnz() <= 200 * 7);
        let fill = ilut_fill(&a);
        assert!(fill >= ILUT_MIN_FILL);
    }

    #[test]
    fn ilut_substitutes_cancelled_pivot() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let f = ilut_factor(&a, 0.0, 2).unwrap();
        let mut z = vec![0.0; 2];
        f.apply(&[1.0, 1.0], &mut z);
        assert!(z.iter().all(|v| v.is_finite()));
        let zero = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(
            ilut_factor(&zero, 0.0, 2).unwrap_err(),
            PrecondError::ZeroPivot { row: 1 } | PrecondError::MissingDiagonal { row: 1 }
        ));
    }

    #[test]
    fn kind_round_trip() {
        for k in [
            PrecondKind::None,
            PrecondKind::Jacobi,
            PrecondKind::Ilu0,
            PrecondKind::Ilut,
        ] {
            assert_eq!(k.to_string().parse::<PrecondKind>().unwrap(), k);
        }
        assert!("ilu2".parse::<PrecondKind>().is_err());
        assert_eq!(PrecondKind::default(), PrecondKind::Ilut);
    }
}
