//! Reference-element machinery: Gauss–Legendre rules and tensor-product
//! Lagrange `Q_k` shape functions on equispaced nodes of `[0, 1]^2`.
//!
//! Local node numbering is `a = t (k + 1) + s`, with `s` running along x.

use std::f64::consts::PI;

use thiserror::Error;

pub const MAX_QUADRATURE_POINTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("quadrature order {0} outside 1..={MAX_QUADRATURE_POINTS}")]
    InvalidQuadratureOrder(usize),
    #[error("Newton iteration for Legendre root {index} of P_{order} left residual {residual:e}")]
    RootNotConverged {
        order: usize,
        index: usize,
        residual: f64,
    },
    #[error("polynomial degree must be at least 1")]
    ZeroDegree,
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    /// Nodes and weights transplanted to `[0, 1]`.
    pub fn on_unit_interval(&self) -> (Vec<f64>, Vec<f64>) {
        let nodes = self.nodes.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let weights = self.weights.iter().map(|w| 0.5 * w).collect();
        (nodes, weights)
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn gauss_legendre(m: usize) -> Result<QuadratureRule1D, ElementError> {
    if !(1..=MAX_QUADRATURE_POINTS).contains(&m) {
        return Err(ElementError::InvalidQuadratureOrder(m));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, dp) = legendre_with_derivative(m, x);
        if p.abs() >= 1e-14 {
            return Err(ElementError::RootNotConverged {
                order: m,
                index: i,
                residual: p.abs(),
            });
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Roots come out in decreasing order; fill symmetric pairs.
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadratureRule1D { nodes, weights })
}

/// Value of the degree-`k` Lagrange polynomial on nodes `{r/k}` that equals 1 at `s/k`.
pub fn basis_eval_1d(k: usize, s: usize, t: f64) -> f64 {
    debug_assert!(s <= k);
    let kf = k as f64;
    let ts = s as f64 / kf;
    (0..=k)
        .filter(|&r| r != s)
        .map(|r| {
            let tr = r as f64 / kf;
            (t - tr) / (ts - tr)
        })
        .product()
}

pub fn basis_deriv_1d(k: usize, s: usize, t: f64) -> f64 {
    debug_assert!(s <= k);
    let kf = k as f64;
    let ts = s as f64 / kf;
    let denom: f64 = (0..=k)
        .filter(|&r| r != s)
        .map(|r| ts - r as f64 / kf)
        .product();
    // Product rule over the numerator factors.
    let mut sum = 0.0;
    for skip in (0..=k).filter(|&r| r != s) {
        sum += (0..=k)
            .filter(|&r| r != s && r != skip)
            .map(|r| t - r as f64 / kf)
            .product::<f64>();
    }
    sum / denom
}

/// One-dimensional Lagrange basis of degree `k` on equispaced nodes of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis1D {
    pub degree: usize,
    pub nodes: Vec<f64>,
}

impl LagrangeBasis1D {
    pub fn new(degree: usize) -> Result<Self, ElementError> {
        if degree == 0 {
            return Err(ElementError::ZeroDegree);
        }
        let nodes = (0..=degree).map(|s| s as f64 / degree as f64).collect();
        Ok(Self { degree, nodes })
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self, t: f64) -> Vec<f64> {
        (0..=self.degree)
            .map(|s| basis_eval_1d(self.degree, s, t))
            .collect()
    }

    pub fn derivatives(&self, t: f64) -> Vec<f64> {
        (0..=self.degree)
            .map(|s| basis_deriv_1d(self.degree, s, t))
            .collect()
    }
}

/// Tensor-product basis values and reference gradients tabulated at the
/// `m x m` Gauss points of `[0, 1]^2`.
#[derive(Debug, Clone)]
pub struct ShapeTable {
    pub degree: usize,
    /// Reference coordinates of the quadrature points, x fastest.
    pub points: Vec<[f64; 2]>,
    /// Weights on `[0, 1]^2` (they sum to 1).
    pub weights: Vec<f64>,
    values: Vec<f64>,
    gradients: Vec<[f64; 2]>,
}

impl ShapeTable {
    pub fn new(k: usize, rule: &QuadratureRule1D) -> Result<Self, ElementError> {
        let basis = LagrangeBasis1D::new(k)?;
        let (nodes, w1) = rule.on_unit_interval();
        let nb = (k + 1) * (k + 1);
        let m = nodes.len();
        let mut points = Vec::with_capacity(m * m);
        let mut weights = Vec::with_capacity(m * m);
        let mut values = Vec::with_capacity(m * m * nb);
        let mut gradients = Vec::with_capacity(m * m * nb);
        let vals: Vec<Vec<f64>> = nodes.iter().map(|&t| basis.values(t)).collect();
        let ders: Vec<Vec<f64>> = nodes.iter().map(|&t| basis.derivatives(t)).collect();
        for qy in 0..m {
            for qx in 0..m {
                points.push([nodes[qx], nodes[qy]]);
                weights.push(w1[qx] * w1[qy]);
                for t in 0..=k {
                    for s in 0..=k {
                        values.push(vals[qx][s] * vals[qy][t]);
                        gradients.push([ders[qx][s] * vals[qy][t], vals[qx][s] * ders[qy][t]]);
                    }
                }
            }
        }
        Ok(Self {
            degree: k,
            points,
            weights,
            values,
            gradients,
        })
    }

    /// Table for `m` Gauss points per direction.
    pub fn with_points(k: usize, m: usize) -> Result<Self, ElementError> {
        Self::new(k, &gauss_legendre(m)?)
    }

    pub fn num_basis(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn values(&self, q: usize) -> &[f64] {
        let nb = self.num_basis();
        &self.values[q * nb..(q + 1) * nb]
    }

    pub fn gradients(&self, q: usize) -> &[[f64; 2]] {
        let nb = self.num_basis();
        &self.gradients[q * nb..(q + 1) * nb]
    }
}

/// Values and reference gradients of all `(k+1)^2` tensor basis functions at `(sx, sy)` in `[0,1]^2`.
pub fn tensor_basis_at(k: usize, sx: f64, sy: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    let vx: Vec<f64> = (0..=k).map(|s| basis_eval_1d(k, s, sx)).collect();
    let vy: Vec<f64> = (0..=k).map(|s| basis_eval_1d(k, s, sy)).collect();
    let dx: Vec<f64> = (0..=k).map(|s| basis_deriv_1d(k, s, sx)).collect();
    let dy: Vec<f64> = (0..=k).map(|s| basis_deriv_1d(k, s, sy)).collect();
    let mut values = Vec::with_capacity((k + 1) * (k + 1));
    let mut grads = Vec::with_capacity((k + 1) * (k + 1));
    for t in 0..=k {
        for s in 0..=k {
            values.push(vx[s] * vy[t]);
            grads.push([dx[s] * vy[t], vx[s] * dy[t]]);
        }
    }
    (values, grads)
}
