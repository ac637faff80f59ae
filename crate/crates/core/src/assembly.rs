//! Degree-of-freedom bookkeeping, element integrals and global assembly of
//! the Galerkin system `ε(∇u, ∇v) + (−b·∇u + c u, v) = (f, v)`.
//!
//! Global nodes are `(x_i^s, y_j^t)` with `x_i^s = x_i + (s/k) h_i`; node
//! `(gx, gy)` with `gx = i k + s` has index `gy (kN_x + 1) + gx` (x fastest).

use rayon::prelude::*;
use thiserror::Error;

use crate::element::{tensor_basis_at, ElementError, ShapeTable};
use crate::linalg::{CsrMatrix, SparseError};
use crate::mesh::{Mesh1D, TensorMesh};
use crate::problems::ProblemSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("mesh has no elements")]
    EmptyMesh,
    #[error("polynomial degree must be at least 1")]
    ZeroDegree,
    #[error("point ({x}, {y}) lies outside the unit square")]
    OutsideDomain { x: f64, y: f64 },
    #[error("expected {expected} coefficients, got {found}")]
    CoefficientCount { expected: usize, found: usize },
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Axis-aligned element `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn hx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn hy(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn map(&self, ref_pt: [f64; 2]) -> (f64, f64) {
        (
            self.x0 + ref_pt[0] * self.hx(),
            self.y0 + ref_pt[1] * self.hy(),
        )
    }
}

fn nodal_coordinates(mesh: &Mesh1D, k: usize) -> Vec<f64> {
    let n = mesh.num_elements();
    let pts = mesh.points();
    let mut out = Vec::with_capacity(k * n + 1);
    for i in 0..n {
        let h = mesh.width(i);
        out.push(pts[i]);
        for s in 1..k {
            out.push(pts[i] + (s as f64 / k as f64) * h);
        }
    }
    out.push(pts[n]);
    out
}

/// Global node set of the degree-`k` space on a tensor mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub degree: usize,
    pub nx: usize,
    pub ny: usize,
    pub x_nodes: Vec<f64>,
    pub y_nodes: Vec<f64>,
    boundary: Vec<bool>,
    /// Interior position of each global node, `None` on the boundary.
    interior_index: Vec<Option<usize>>,
    interior_nodes: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &TensorMesh, k: usize) -> Result<Self, AssemblyError> {
        if k == 0 {
            return Err(AssemblyError::ZeroDegree);
        }
        let (nx, ny) = mesh.num_elements();
        if nx == 0 || ny == 0 {
            return Err(AssemblyError::EmptyMesh);
        }
        let x_nodes = nodal_coordinates(&mesh.x, k);
        let y_nodes = nodal_coordinates(&mesh.y, k);
        let (px, py) = (x_nodes.len(), y_nodes.len());
        let mut boundary = vec![false; px * py];
        let mut interior_index = vec![None; px * py];
        let mut interior_nodes = Vec::new();
        for gy in 0..py {
            for gx in 0..px {
                let g = gy * px + gx;
                if gx == 0 || gy == 0 || gx == px - 1 || gy == py - 1 {
                    boundary[g] = true;
                } else {
                    interior_index[g] = Some(interior_nodes.len());
                    interior_nodes.push(g);
                }
            }
        }
        Ok(Self {
            degree: k,
            nx,
            ny,
            x_nodes,
            y_nodes,
            boundary,
            interior_index,
            interior_nodes,
        })
    }

    /// Nodes per row of the grid, `k N_x + 1`.
    pub fn row_len(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.x_nodes.len() * self.y_nodes.len()
    }

    pub fn num_interior(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn is_boundary(&self, g: usize) -> bool {
        self.boundary[g]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn interior_index(&self, g: usize) -> Option<usize> {
        self.interior_index[g]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    /// Global index of node `(i, s, j, t)`; `s = 0` with `i = N` addresses the last line.
    pub fn global_index(&self, i: usize, s: usize, j: usize, t: usize) -> usize {
        let k = self.degree;
        (j * k + t) * self.row_len() + i * k + s
    }

    /// `(i, s, j, t)` of a global node, with end nodes reported as `(N, 0)`.
    pub fn node_indices(&self, g: usize) -> (usize, usize, usize, usize) {
        let k = self.degree;
        let (gx, gy) = (g % self.row_len(), g / self.row_len());
        (gx / k, gx % k, gy / k, gy % k)
    }

    pub fn node_coordinates(&self, g: usize) -> (f64, f64) {
        (
            self.x_nodes[g % self.row_len()],
            self.y_nodes[g / self.row_len()],
        )
    }

    /// Global indices of the `(k+1)^2` nodes of element `(i, j)` in local order.
    pub fn element_dofs(&self, i: usize, j: usize) -> Vec<usize> {
        let k = self.degree;
        let mut out = Vec::with_capacity((k + 1) * (k + 1));
        for t in 0..=k {
            for s in 0..=k {
                out.push((j * k + t) * self.row_len() + i * k + s);
            }
        }
        out
    }

    /// Embeds interior values into a full coefficient vector with zero boundary values.
    pub fn extend_interior(&self, interior: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_nodes()];
        for (&g, &v) in self.interior_nodes.iter().zip(interior) {
            full[g] = v;
        }
        full
    }
}

/// Local stiffness/convection/reaction matrix, row-major with rows indexing test functions.
pub fn element_matrix(problem: &ProblemSpec, elem: &Rect, table: &ShapeTable) -> Vec<f64> {
    let nb = table.num_basis();
    let (hx, hy) = (elem.hx(), elem.hy());
    let jac = hx * hy;
    let eps = problem.epsilon;
    let mut m = vec![0.0; nb * nb];
    let mut grad = vec![[0.0; 2]; nb];
    for q in 0..table.num_points() {
        let (x, y) = elem.map(table.points[q]);
        let w = table.weights[q] * jac;
        let (b1, b2, c) = ((problem.b1)(x, y), (problem.b2)(x, y), (problem.c)(x, y));
        let phi = table.values(q);
        for (g, rg) in grad.iter_mut().zip(table.gradients(q)) {
            *g = [rg[0] / hx, rg[1] / hy];
        }
        for a in 0..nb {
            let row = &mut m[a * nb..(a + 1) * nb];
            let (ga, pa) = (grad[a], phi[a]);
            for (bidx, entry) in row.iter_mut().enumerate() {
                let gb = grad[bidx];
                let diffusion = eps * (gb[0] * ga[0] + gb[1] * ga[1]);
                let transport = -(b1 * gb[0] + b2 * gb[1]) * pa;
                let reaction = c * phi[bidx] * pa;
                *entry += w * (diffusion + transport + reaction);
            }
        }
    }
    m
}

pub fn element_load(problem: &ProblemSpec, elem: &Rect, table: &ShapeTable) -> Vec<f64> {
    let nb = table.num_basis();
    let jac = elem.hx() * elem.hy();
    let mut v = vec![0.0; nb];
    for q in 0..table.num_points() {
        let (x, y) = elem.map(table.points[q]);
        let fw = (problem.f)(x, y) * table.weights[q] * jac;
        for (va, pa) in v.iter_mut().zip(table.values(q)) {
            *va += fw * pa;
        }
    }
    v
}

/// Gauss points per direction used for assembly.
pub fn assembly_points(k: usize) -> usize {
    k + 2
}

/// Discrete system over the interior nodes.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
}

impl LinearSystem {
    pub fn dimension(&self) -> usize {
        self.rhs.len()
    }
}

/// Assembles the system with `k + 2` Gauss points per direction, eliminating
/// the boundary rows and columns (homogeneous Dirichlet data).
pub fn assemble(
    problem: &ProblemSpec,
    mesh: &TensorMesh,
    k: usize,
) -> Result<LinearSystem, AssemblyError> {
    assemble_with_points(problem, mesh, k, assembly_points(k))
}

pub fn assemble_with_points(
    problem: &ProblemSpec,
    mesh: &TensorMesh,
    k: usize,
    points: usize,
) -> Result<LinearSystem, AssemblyError> {
    let dofs = DofMap::new(mesh, k)?;
    let table = ShapeTable::with_points(k, points)?;
    let (nx, ny) = (dofs.nx, dofs.ny);
    let nb = table.num_basis();
    let px = mesh.x.points();
    let py = mesh.y.points();

    let locals: Vec<(Vec<f64>, Vec<f64>)> = (0..nx * ny)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e % nx, e / nx);
            let rect = Rect::new(px[i], px[i + 1], py[j], py[j + 1]);
            (
                element_matrix(problem, &rect, &table),
                element_load(problem, &rect, &table),
            )
        })
        .collect();

    let n = dofs.num_interior();
    let mut rhs = vec![0.0; n];
    let mut triplets = Vec::with_capacity(nx * ny * nb * nb);
    for (e, (mat, load)) in locals.iter().enumerate() {
        let ids: Vec<Option<usize>> = dofs
            .element_dofs(e % nx, e / nx)
            .into_iter()
            .map(|g| dofs.interior_index(g))
            .collect();
        for (a, ra) in ids.iter().enumerate() {
            let Some(r) = *ra else { continue };
            rhs[r] += load[a];
            for (b, cb) in ids.iter().enumerate() {
                if let Some(c) = *cb {
                    triplets.push((r, c, mat[a * nb + b]));
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(n, n, &triplets)?;
    Ok(LinearSystem { matrix, rhs, dofs })
}

/// A degree-`k` finite element function with one coefficient per global node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    pub mesh: TensorMesh,
    pub dofs: DofMap,
    pub coefficients: Vec<f64>,
}

impl FeFunction {
    pub fn new(mesh: TensorMesh, k: usize, coefficients: Vec<f64>) -> Result<Self, AssemblyError> {
        let dofs = DofMap::new(&mesh, k)?;
        if coefficients.len() != dofs.num_nodes() {
            return Err(AssemblyError::CoefficientCount {
                expected: dofs.num_nodes(),
                found: coefficients.len(),
            });
        }
        Ok(Self {
            mesh,
            dofs,
            coefficients,
        })
    }

    pub fn zeros(mesh: TensorMesh, k: usize) -> Result<Self, AssemblyError> {
        let dofs = DofMap::new(&mesh, k)?;
        let coefficients = vec![0.0; dofs.num_nodes()];
        Ok(Self {
            mesh,
            dofs,
            coefficients,
        })
    }

    pub fn degree(&self) -> usize {
        self.dofs.degree
    }

    /// Coefficients of element `(i, j)` in local order.
    pub fn element_coefficients(&self, i: usize, j: usize) -> Vec<f64> {
        self.dofs
            .element_dofs(i, j)
            .into_iter()
            .map(|g| self.coefficients[g])
            .collect()
    }

    pub fn element_rect(&self, i: usize, j: usize) -> Rect {
        let (px, py) = (self.mesh.x.points(), self.mesh.y.points());
        Rect::new(px[i], px[i + 1], py[j], py[j + 1])
    }

    fn locate(&self, x: f64, y: f64) -> Result<(usize, usize), AssemblyError> {
        match (self.mesh.x.locate(x), self.mesh.y.locate(y)) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => Err(AssemblyError::OutsideDomain { x, y }),
        }
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64, AssemblyError> {
        self.evaluate_with_gradient(x, y).map(|(v, _)| v)
    }

    pub fn evaluate_with_gradient(&self, x: f64, y: f64) -> Result<(f64, [f64; 2]), AssemblyError> {
        let (i, j) = self.locate(x, y)?;
        let rect = self.element_rect(i, j);
        let (sx, sy) = ((x - rect.x0) / rect.hx(), (y - rect.y0) / rect.hy());
        let (vals, grads) = tensor_basis_at(self.degree(), sx, sy);
        let coeffs = self.element_coefficients(i, j);
        let mut v = 0.0;
        let mut g = [0.0, 0.0];
        for ((c, phi), dphi) in coeffs.iter().zip(&vals).zip(&grads) {
            v += c * phi;
            g[0] += c * dphi[0] / rect.hx();
            g[1] += c * dphi[1] / rect.hy();
        }
        Ok((v, g))
    }
}

/// Evaluates `fefun` at `(x, y)`.
pub fn evaluate_fe(fefun: &FeFunction, x: f64, y: f64) -> Result<f64, AssemblyError> {
    fefun.evaluate(x, y)
}
