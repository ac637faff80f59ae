//! Interpolation laboratory: layer decompositions, Lagrange interpolation,
//! the corrected interpolant `Πu`, error norms on mesh-aligned regions and
//! observed convergence orders.
//!
//! `Πu` starts from the Lagrange interpolant `u^I` and zeroes the layer
//! degrees of freedom that sit just before the transition point:
//!
//! * `P1`: nodes `x_{N/2-1}^s`, `s < k`, on every horizontal grid line, carrying `E1`;
//! * `P2`: the mirror image in `y`, carrying `E2`;
//! * `P12`: the `k x k` block at element `(N/2-1, N/2-1)`, carrying `E12`.
//!
//! Boundary coefficients of `Πu` are then set to zero so it stays in the
//! discrete space with homogeneous Dirichlet data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::assembly::{AssemblyError, DofMap, FeFunction, Rect};
use crate::element::{gauss_legendre, tensor_basis_at, ShapeTable};
use crate::mesh::{Mesh1D, TensorMesh};
use crate::problems::Field;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("decomposition does not vanish on the boundary: |u| = {value:e} at ({x}, {y})")]
    BoundaryContract { x: f64, y: f64, value: f64 },
    #[error("region edge {coordinate} is not a mesh line")]
    MisalignedRegion { coordinate: f64 },
    #[error("order estimation needs at least two samples")]
    TooFewSamples,
    #[error("error value {0} is not positive")]
    NonPositiveError(f64),
    #[error("element counts must double between samples ({0} -> {1})")]
    NotDoubling(usize, usize),
    #[error("layer operators need at least 2 elements per direction")]
    MeshTooSmall,
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// `u = S + E1 + E2 + E12` with smooth part `S`, edge layers `E1` (at `x = 0`),
/// `E2` (at `y = 0`) and corner layer `E12`.
#[derive(Debug, Clone)]
pub struct LayerDecomposition {
    pub smooth: Field,
    pub e1: Field,
    pub e2: Field,
    pub e12: Field,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl LayerDecomposition {
    pub fn total(&self) -> Field {
        Field::sum(&[
            self.smooth.clone(),
            self.e1.clone(),
            self.e2.clone(),
            self.e12.clone(),
        ])
    }

    pub fn part(&self, which: LayerPart) -> &Field {
        match which {
            LayerPart::Smooth => &self.smooth,
            LayerPart::E1 => &self.e1,
            LayerPart::E2 => &self.e2,
            LayerPart::E12 => &self.e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LayerPart {
    Smooth,
    E1,
    E2,
    E12,
}

/// Decomposition of the benchmark solution obtained by expanding
/// `2 sin(πx)(1-y)^2 (1 - e^{-2x/eps})(1 - e^{-y/eps})`:
/// `S = 2 sin(πx)(1-y)^2`, `E1 = -S e^{-2x/eps}`, `E2 = -S e^{-y/eps}`,
/// `E12 = S e^{-2x/eps} e^{-y/eps}`.
pub fn benchmark_decomposition(epsilon: f64) -> LayerDecomposition {
    let eps = epsilon;
    // Each part is S(x, y) * gx(x) * gy(y) with exponential or unit factors.
    let part = move |lx: bool, ly: bool, sign: f64| {
        let gx = move |x: f64| -> (f64, f64) {
            if lx {
                let e = (-2.0 * x / eps).exp();
                (e, -2.0 * e / eps)
            } else {
                (1.0, 0.0)
            }
        };
        let gy = move |y: f64| -> (f64, f64) {
            if ly {
                let e = (-y / eps).exp();
                (e, -e / eps)
            } else {
                (1.0, 0.0)
            }
        };
        Field::new(
            move |x, y| {
                let w = 1.0 - y;
                sign * 2.0 * (PI * x).sin() * w * w * gx(x).0 * gy(y).0
            },
            move |x, y| {
                let w = 1.0 - y;
                let (s, c) = (PI * x).sin_cos();
                let (ex, dex) = gx(x);
                let (ey, dey) = gy(y);
                let ax = 2.0 * s * ex;
                let dax = 2.0 * PI * c * ex + 2.0 * s * dex;
                let by = w * w * ey;
                let dby = -2.0 * w * ey + w * w * dey;
                [sign * dax * by, sign * ax * dby]
            },
        )
    };
    LayerDecomposition {
        smooth: part(false, false, 1.0),
        e1: part(true, false, -1.0),
        e2: part(false, true, -1.0),
        e12: part(true, true, 1.0),
        beta1: 2.0,
        beta2: 1.0,
        epsilon,
    }
}

/// Lagrange interpolant: coefficients are the field values at every global node.
pub fn lagrange_interpolate(
    field: &Field,
    mesh: &TensorMesh,
    k: usize,
) -> Result<FeFunction, InterpError> {
    let dofs = DofMap::new(mesh, k)?;
    let coefficients = (0..dofs.num_nodes())
        .map(|g| {
            let (x, y) = dofs.node_coordinates(g);
            field.value(x, y)
        })
        .collect();
    Ok(FeFunction::new(mesh.clone(), k, coefficients)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LayerOperator {
    P1,
    P2,
    P12,
}

impl LayerOperator {
    pub fn layer_part(self) -> LayerPart {
        match self {
            LayerOperator::P1 => LayerPart::E1,
            LayerOperator::P2 => LayerPart::E2,
            LayerOperator::P12 => LayerPart::E12,
        }
    }
}

/// Global node indices selected by a layer operator, with their `(i, s, j, t)` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMask {
    pub nodes: Vec<usize>,
    pub labels: Vec<(usize, usize, usize, usize)>,
}

impl NodeMask {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.nodes.binary_search(&g).is_ok()
    }
}

pub fn node_mask(dofs: &DofMap, which: LayerOperator) -> Result<NodeMask, InterpError> {
    let k = dofs.degree;
    if dofs.nx < 2 || dofs.ny < 2 {
        return Err(InterpError::MeshTooSmall);
    }
    let gx_layer: Vec<usize> = (0..k).map(|s| (dofs.nx / 2 - 1) * k + s).collect();
    let gy_layer: Vec<usize> = (0..k).map(|t| (dofs.ny / 2 - 1) * k + t).collect();
    let all_x: Vec<usize> = (0..dofs.x_nodes.len()).collect();
    let all_y: Vec<usize> = (0..dofs.y_nodes.len()).collect();
    let (xs, ys) = match which {
        LayerOperator::P1 => (&gx_layer, &all_y),
        LayerOperator::P2 => (&all_x, &gy_layer),
        LayerOperator::P12 => (&gx_layer, &gy_layer),
    };
    let row = dofs.row_len();
    let mut nodes: Vec<usize> = ys
        .iter()
        .flat_map(|&gy| xs.iter().map(move |&gx| gy * row + gx))
        .collect();
    nodes.sort_unstable();
    let labels = nodes.iter().map(|&g| dofs.node_indices(g)).collect();
    Ok(NodeMask { nodes, labels })
}

/// The correction `P E`: `fefun`'s coefficients on the operator's mask, zero elsewhere.
pub fn apply_operator_p(fefun: &FeFunction, which: LayerOperator) -> Result<FeFunction, InterpError> {
    let mask = node_mask(&fefun.dofs, which)?;
    let mut coefficients = vec![0.0; fefun.coefficients.len()];
    for &g in &mask.nodes {
        coefficients[g] = fefun.coefficients[g];
    }
    Ok(FeFunction {
        mesh: fefun.mesh.clone(),
        dofs: fefun.dofs.clone(),
        coefficients,
    })
}

/// `E^I - P E + B E`, where the boundary correction `B E` puts back whatever
/// `P E` removed on the boundary, so the result keeps the trace of `E^I`.
pub fn layer_interpolant(fefun: &FeFunction, which: LayerOperator) -> Result<FeFunction, InterpError> {
    let mask = node_mask(&fefun.dofs, which)?;
    let mut out = fefun.clone();
    for &g in &mask.nodes {
        if !fefun.dofs.is_boundary(g) {
            out.coefficients[g] = 0.0;
        }
    }
    Ok(out)
}

const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Builds `Πu = u^I - P1 E1 - P2 E2 - P12 E12` with zero boundary coefficients.
pub fn build_pi_u(
    decomp: &LayerDecomposition,
    mesh: &TensorMesh,
    k: usize,
) -> Result<FeFunction, InterpError> {
    let dofs = DofMap::new(mesh, k)?;
    let total = decomp.total();
    let mut coefficients = Vec::with_capacity(dofs.num_nodes());
    for g in 0..dofs.num_nodes() {
        let (x, y) = dofs.node_coordinates(g);
        let v = total.value(x, y);
        if dofs.is_boundary(g) && v.abs() > BOUNDARY_TOLERANCE {
            return Err(InterpError::BoundaryContract { x, y, value: v });
        }
        coefficients.push(v);
    }
    for op in [LayerOperator::P1, LayerOperator::P2, LayerOperator::P12] {
        let part = decomp.part(op.layer_part());
        for g in node_mask(&dofs, op)?.nodes {
            let (x, y) = dofs.node_coordinates(g);
            coefficients[g] -= part.value(x, y);
        }
    }
    for (g, c) in coefficients.iter_mut().enumerate() {
        if dofs.is_boundary(g) {
            *c = 0.0;
        }
    }
    Ok(FeFunction {
        mesh: mesh.clone(),
        dofs,
        coefficients,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Norm {
    L2,
    H1Semi,
    /// `(eps |v|_1^2 + ‖v‖^2)^{1/2}`
    Energy { epsilon: f64 },
}

impl Norm {
    pub fn label(&self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::H1Semi => "h1semi",
            Norm::Energy { .. } => "energy",
        }
    }
}

/// Squared L2 and H1-seminorm contributions of an error function.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorNorms {
    pub l2_sq: f64,
    pub h1_sq: f64,
}

impl ErrorNorms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }

    pub fn h1_semi(&self) -> f64 {
        self.h1_sq.sqrt()
    }

    pub fn energy(&self, epsilon: f64) -> f64 {
        (epsilon * self.h1_sq + self.l2_sq).sqrt()
    }

    pub fn norm(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L2 => self.l2(),
            Norm::H1Semi => self.h1_semi(),
            Norm::Energy { epsilon } => self.energy(epsilon),
        }
    }
}

/// Gauss points per direction for error integration.
pub fn error_points(k: usize) -> usize {
    k + 3
}

fn aligned_index(mesh: &Mesh1D, coordinate: f64) -> Result<usize, InterpError> {
    let pts = mesh.points();
    let tol = 1e-12 * coordinate.abs().max(1e-300);
    let idx = pts.partition_point(|&p| p < coordinate - tol);
    if idx < pts.len() && (pts[idx] - coordinate).abs() <= tol {
        Ok(idx)
    } else {
        Err(InterpError::MisalignedRegion { coordinate })
    }
}

/// Element index ranges `(i0..i1, j0..j1)` covered by mesh-aligned rectangles.
fn region_elements(
    mesh: &TensorMesh,
    region: Option<&[Rect]>,
) -> Result<Vec<(usize, usize)>, InterpError> {
    let (nx, ny) = mesh.num_elements();
    let mut cells = Vec::new();
    match region {
        None => {
            for j in 0..ny {
                for i in 0..nx {
                    cells.push((i, j));
                }
            }
        }
        Some(rects) => {
            let mut seen = vec![false; nx * ny];
            for r in rects {
                let (i0, i1) = (aligned_index(&mesh.x, r.x0)?, aligned_index(&mesh.x, r.x1)?);
                let (j0, j1) = (aligned_index(&mesh.y, r.y0)?, aligned_index(&mesh.y, r.y1)?);
                for j in j0..j1 {
                    for i in i0..i1 {
                        if !seen[j * nx + i] {
                            seen[j * nx + i] = true;
                            cells.push((i, j));
                        }
                    }
                }
            }
            cells.sort_by_key(|&(i, j)| (j, i));
        }
    }
    Ok(cells)
}

/// Reference subintervals of each element of a 1D mesh for error
/// integration. An element more than twice as wide as its left neighbour
/// is split geometrically, starting from the neighbour's width and doubling,
/// so that functions decaying on the neighbour's scale are resolved.
pub fn integration_pieces(mesh: &Mesh1D) -> Vec<Vec<(f64, f64)>> {
    let h = mesh.widths();
    (0..h.len())
        .map(|i| {
            if i == 0 || h[i] <= 2.0 * h[i - 1] {
                return vec![(0.0, 1.0)];
            }
            let mut pieces = Vec::new();
            let mut a = 0.0;
            let mut w = h[i - 1] / h[i];
            while a + 2.0 * w < 1.0 {
                pieces.push((a, a + w));
                a += w;
                w *= 2.0;
            }
            pieces.push((a, 1.0));
            pieces
        })
        .collect()
}

/// Integrates `(field - fefun)^2` and `|∇(field - fefun)|^2` elementwise with
/// `points` Gauss points per direction on every piece given by
/// [`integration_pieces`], over a region (all of Ω when `None`).
pub fn error_norms_with_points(
    field: &Field,
    fefun: &FeFunction,
    region: Option<&[Rect]>,
    points: usize,
) -> Result<ErrorNorms, InterpError> {
    let k = fefun.degree();
    let rule = gauss_legendre(points).map_err(AssemblyError::from)?;
    let (nodes, weights) = rule.on_unit_interval();
    let table = ShapeTable::new(k, &rule).map_err(AssemblyError::from)?;
    let cells = region_elements(&fefun.mesh, region)?;
    let px = integration_pieces(&fefun.mesh.x);
    let py = integration_pieces(&fefun.mesh.y);
    let parts: Vec<ErrorNorms> = cells
        .par_iter()
        .map(|&(i, j)| {
            let rect = fefun.element_rect(i, j);
            let coeffs = fefun.element_coefficients(i, j);
            let (hx, hy) = (rect.hx(), rect.hy());
            let jac = hx * hy;
            let mut acc = ErrorNorms::default();
            let mut add = |r: [f64; 2], w: f64, phi: &[f64], dphi: &[[f64; 2]]| {
                let (x, y) = rect.map(r);
                let mut v = 0.0;
                let mut g = [0.0, 0.0];
                for ((c, p), d) in coeffs.iter().zip(phi).zip(dphi) {
                    v += c * p;
                    g[0] += c * d[0];
                    g[1] += c * d[1];
                }
                let fg = field.gradient(x, y);
                let e = field.value(x, y) - v;
                let ex = fg[0] - g[0] / hx;
                let ey = fg[1] - g[1] / hy;
                acc.l2_sq += w * jac * e * e;
                acc.h1_sq += w * jac * (ex * ex + ey * ey);
            };
            if px[i].len() == 1 && py[j].len() == 1 {
                for q in 0..table.num_points() {
                    add(table.points[q], table.weights[q], table.values(q), table.gradients(q));
                }
                return acc;
            }
            for &(ya, yb) in &py[j] {
                for &(xa, xb) in &px[i] {
                    for (ty, wy) in nodes.iter().zip(&weights) {
                        for (tx, wx) in nodes.iter().zip(&weights) {
                            let r = [xa + (xb - xa) * tx, ya + (yb - ya) * ty];
                            let (phi, dphi) = tensor_basis_at(k, r[0], r[1]);
                            add(r, wx * wy * (xb - xa) * (yb - ya), &phi, &dphi);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Ok(parts.iter().fold(ErrorNorms::default(), |a, p| ErrorNorms {
        l2_sq: a.l2_sq + p.l2_sq,
        h1_sq: a.h1_sq + p.h1_sq,
    }))
}

pub fn error_norms(
    field: &Field,
    fefun: &FeFunction,
    region: Option<&[Rect]>,
) -> Result<ErrorNorms, InterpError> {
    error_norms_with_points(field, fefun, region, error_points(fefun.degree()))
}

/// `‖field - fefun‖` in the requested norm, over a mesh-aligned region.
pub fn measure_error(
    field: &Field,
    fefun: &FeFunction,
    norm: Norm,
    region: Option<&[Rect]>,
) -> Result<f64, InterpError> {
    Ok(error_norms(field, fefun, region)?.norm(norm))
}

/// Ω without the strip `(x_{N/2-1}, x_{N/2}) x [0, 1]`.
pub fn outside_x_transition_strip(mesh: &TensorMesh) -> Vec<Rect> {
    let px = mesh.x.points();
    let n = mesh.x.num_elements();
    vec![
        Rect::new(0.0, px[n / 2 - 1], 0.0, 1.0),
        Rect::new(px[n / 2], 1.0, 0.0, 1.0),
    ]
}

/// Pairwise and least-squares convergence orders from `(N, error)` samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    /// `log2(e_N / e_{2N})` for consecutive samples.
    pub pairwise: Vec<f64>,
    /// Negated slope of the least-squares fit of `log e` against `log N`.
    pub least_squares: f64,
}

pub fn estimate_order(samples: &[(usize, f64)]) -> Result<OrderEstimate, InterpError> {
    if samples.len() < 2 {
        return Err(InterpError::TooFewSamples);
    }
    for &(_, e) in samples {
        if !(e > 0.0) {
            return Err(InterpError::NonPositiveError(e));
        }
    }
    for w in samples.windows(2) {
        if w[1].0 != 2 * w[0].0 {
            return Err(InterpError::NotDoubling(w[0].0, w[1].0));
        }
    }
    let pairwise = samples
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).log2())
        .collect();
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(OrderEstimate {
        pairwise,
        least_squares: -sxy / sxx,
    })
}

/// Which quantity an interpolation study measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StudyTarget {
    /// `E1 - E1^I`
    E1,
    /// `E2 - E2^I`
    E2,
    /// `E12 - E12^I`
    E12,
    /// `u - u^I`
    Lagrange,
    /// `u - Πu`
    Pi,
    /// `P1 E1` itself
    P1,
}

impl fmt::Display for StudyTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyTarget::E1 => "E1",
            StudyTarget::E2 => "E2",
            StudyTarget::E12 => "E12",
            StudyTarget::Lagrange => "u-lagrange",
            StudyTarget::Pi => "u-pi",
            StudyTarget::P1 => "P1",
        })
    }
}

impl FromStr for StudyTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E1" | "e1" => Ok(StudyTarget::E1),
            "E2" | "e2" => Ok(StudyTarget::E2),
            "E12" | "e12" => Ok(StudyTarget::E12),
            "u-lagrange" | "lagrange" => Ok(StudyTarget::Lagrange),
            "u-pi" | "pi" => Ok(StudyTarget::Pi),
            "P1" | "p1" => Ok(StudyTarget::P1),
            other => Err(format!("unknown interpolation target '{other}'")),
        }
    }
}

/// Error norms of one interpolation target on one mesh.
pub fn interpolation_error(
    decomp: &LayerDecomposition,
    target: StudyTarget,
    mesh: &TensorMesh,
    k: usize,
    region: Option<&[Rect]>,
) -> Result<ErrorNorms, InterpError> {
    match target {
        StudyTarget::E1 | StudyTarget::E2 | StudyTarget::E12 => {
            let part = match target {
                StudyTarget::E1 => &decomp.e1,
                StudyTarget::E2 => &decomp.e2,
                _ => &decomp.e12,
            };
            let interp = lagrange_interpolate(part, mesh, k)?;
            error_norms(part, &interp, region)
        }
        StudyTarget::Lagrange => {
            let u = decomp.total();
            let interp = lagrange_interpolate(&u, mesh, k)?;
            error_norms(&u, &interp, region)
        }
        StudyTarget::Pi => {
            let pi = build_pi_u(decomp, mesh, k)?;
            error_norms(&decomp.total(), &pi, region)
        }
        StudyTarget::P1 => {
            let interp = lagrange_interpolate(&decomp.e1, mesh, k)?;
            let p1 = apply_operator_p(&interp, LayerOperator::P1)?;
            error_norms(&Field::zero(), &p1, region)
        }
    }
}
