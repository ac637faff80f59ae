//! Model problems `-eps Δu - b·∇u + c u = f` on the unit square with
//! homogeneous Dirichlet data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

/// A scalar field together with its gradient.
#[derive(Clone)]
pub struct Field {
    value: ScalarFn,
    gradient: GradientFn,
}

impl Field {
    pub fn new(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c, |_, _| [0.0, 0.0])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }

    #[inline]
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        (self.gradient)(x, y)
    }

    /// Pointwise sum of fields.
    pub fn sum(parts: &[Field]) -> Field {
        let a = parts.to_vec();
        let b = parts.to_vec();
        Field::new(
            move |x, y| a.iter().map(|f| f.value(x, y)).sum(),
            move |x, y| {
                b.iter().fold([0.0, 0.0], |acc, f| {
                    let g = f.gradient(x, y);
                    [acc[0] + g[0], acc[1] + g[1]]
                })
            },
        )
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Field")
    }
}

/// Exact solution with the derivatives needed to manufacture the forcing.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub u_x: ScalarFn,
    pub u_y: ScalarFn,
    pub u_xx: ScalarFn,
    pub u_yy: ScalarFn,
}

impl ExactSolution {
    pub fn as_field(&self) -> Field {
        let u = self.u.clone();
        let ux = self.u_x.clone();
        let uy = self.u_y.clone();
        Field::new(move |x, y| u(x, y), move |x, y| [ux(x, y), uy(x, y)])
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution")
    }
}

/// Coefficients, forcing and (optionally) the exact solution of a problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub epsilon: f64,
    pub b1: ScalarFn,
    pub b2: ScalarFn,
    pub c: ScalarFn,
    /// `∂b1/∂x + ∂b2/∂y`.
    pub div_b: ScalarFn,
    pub f: ScalarFn,
    pub exact: Option<ExactSolution>,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("beta1", &self.beta1)
            .field("beta2", &self.beta2)
            .field("gamma", &self.gamma)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem '{0}' (available: {available})", available = PROBLEM_NAMES.join(", "))]
    UnknownProblem(String),
    #[error("perturbation parameter eps = {0} must lie in (0, 1)")]
    InvalidEpsilon(f64),
}

pub const PROBLEM_NAMES: &[&str] = &["benchmark", "polynomial"];

/// `f = -eps (u_xx + u_yy) - b1 u_x - b2 u_y + c u`.
pub fn manufacture_forcing(
    exact: &ExactSolution,
    b1: &ScalarFn,
    b2: &ScalarFn,
    c: &ScalarFn,
    epsilon: f64,
) -> ScalarFn {
    let e = exact.clone();
    let (b1, b2, c) = (b1.clone(), b2.clone(), c.clone());
    Arc::new(move |x, y| {
        -epsilon * ((e.u_xx)(x, y) + (e.u_yy)(x, y)) - b1(x, y) * (e.u_x)(x, y)
            - b2(x, y) * (e.u_y)(x, y)
            + c(x, y) * (e.u)(x, y)
    })
}

fn benchmark_coefficients() -> (ScalarFn, ScalarFn, ScalarFn, ScalarFn) {
    (
        Arc::new(|x, y| 2.0 + 2.0 * x - y),
        Arc::new(|x, y| 3.0 - x + 2.0 * y),
        Arc::new(|_, _| 1.0),
        Arc::new(|_, _| 4.0),
    )
}

/// Factors of the benchmark solution `u = A(x) B(y)` with
/// `A = 2 sin(πx)(1 - e^{-2x/eps})` and `B = (1-y)^2 (1 - e^{-y/eps})`.
#[derive(Debug, Clone, Copy)]
struct BenchmarkFactors {
    eps: f64,
}

impl BenchmarkFactors {
    /// `(A, A', A'')`
    fn a(&self, x: f64) -> [f64; 3] {
        let eps = self.eps;
        let e = (-2.0 * x / eps).exp();
        let one_minus = -(-2.0 * x / eps).exp_m1();
        let (s, c) = (PI * x).sin_cos();
        let a = 2.0 * s * one_minus;
        let da = 2.0 * PI * c * one_minus + 2.0 * s * (2.0 / eps) * e;
        let dda = -2.0 * PI * PI * s * one_minus + 8.0 * PI * c * e / eps
            - 8.0 * s * e / (eps * eps);
        [a, da, dda]
    }

    /// `(B, B', B'')`
    fn b(&self, y: f64) -> [f64; 3] {
        let eps = self.eps;
        let g = (-y / eps).exp();
        let one_minus = -(-y / eps).exp_m1();
        let w = 1.0 - y;
        let b = w * w * one_minus;
        let db = -2.0 * w * one_minus + w * w * g / eps;
        let ddb = 2.0 * one_minus - 4.0 * w * g / eps - w * w * g / (eps * eps);
        [b, db, ddb]
    }
}

/// Benchmark exact solution `2 sin(πx)(1 - e^{-2x/eps})(1 - y)^2 (1 - e^{-y/eps})`.
pub fn benchmark_exact_solution(epsilon: f64) -> ExactSolution {
    let p = BenchmarkFactors { eps: epsilon };
    ExactSolution {
        u: Arc::new(move |x, y| p.a(x)[0] * p.b(y)[0]),
        u_x: Arc::new(move |x, y| p.a(x)[1] * p.b(y)[0]),
        u_y: Arc::new(move |x, y| p.a(x)[0] * p.b(y)[1]),
        u_xx: Arc::new(move |x, y| p.a(x)[2] * p.b(y)[0]),
        u_yy: Arc::new(move |x, y| p.a(x)[0] * p.b(y)[2]),
    }
}

/// The benchmark: `b = (2 + 2x - y, 3 - x + 2y)`, `c = 1`, forcing manufactured
/// from [`benchmark_exact_solution`]; `beta1 = 2`, `beta2 = 1` follow the layer
/// decay rates of the exact solution and `gamma = 1 + (2 + 2)/2 = 3`.
pub fn benchmark_problem(epsilon: f64) -> Result<ProblemSpec, ProblemError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ProblemError::InvalidEpsilon(epsilon));
    }
    let (b1, b2, c, div_b) = benchmark_coefficients();
    let exact = benchmark_exact_solution(epsilon);
    let f = manufacture_forcing(&exact, &b1, &b2, &c, epsilon);
    Ok(ProblemSpec {
        name: "benchmark".into(),
        epsilon,
        b1,
        b2,
        c,
        div_b,
        f,
        exact: Some(exact),
        beta1: 2.0,
        beta2: 1.0,
        gamma: 3.0,
    })
}

/// Benchmark coefficients with the layer-free solution `x(1-x)y(1-y)`, which
/// lies in the discrete space for `k >= 2`.
pub fn polynomial_problem(epsilon: f64) -> Result<ProblemSpec, ProblemError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ProblemError::InvalidEpsilon(epsilon));
    }
    let (b1, b2, c, div_b) = benchmark_coefficients();
    let exact = ExactSolution {
        u: Arc::new(|x, y| x * (1.0 - x) * y * (1.0 - y)),
        u_x: Arc::new(|x, y| (1.0 - 2.0 * x) * y * (1.0 - y)),
        u_y: Arc::new(|x, y| x * (1.0 - x) * (1.0 - 2.0 * y)),
        u_xx: Arc::new(|_, y| -2.0 * y * (1.0 - y)),
        u_yy: Arc::new(|x, _| -2.0 * x * (1.0 - x)),
    };
    let f = manufacture_forcing(&exact, &b1, &b2, &c, epsilon);
    Ok(ProblemSpec {
        name: "polynomial".into(),
        epsilon,
        b1,
        b2,
        c,
        div_b,
        f,
        exact: Some(exact),
        beta1: 2.0,
        beta2: 1.0,
        gamma: 3.0,
    })
}

/// Looks up a problem by name; `paper` is accepted as an alias of `benchmark`.
pub fn problem_by_name(name: &str, epsilon: f64) -> Result<ProblemSpec, ProblemError> {
    match name {
        "benchmark" | "paper" => benchmark_problem(epsilon),
        "polynomial" => polynomial_problem(epsilon),
        other => Err(ProblemError::UnknownProblem(other.to_string())),
    }
}

/// Minimum of a sampled quantity and where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledMinimum {
    pub value: f64,
    pub at: [f64; 2],
    pub required: f64,
}

impl SampledMinimum {
    pub fn holds(&self) -> bool {
        self.value >= self.required
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub b1: SampledMinimum,
    pub b2: SampledMinimum,
    /// `c + (∇·b)/2`.
    pub reaction: SampledMinimum,
}

impl CoefficientReport {
    pub fn all_hold(&self) -> bool {
        self.b1.holds() && self.b2.holds() && self.reaction.holds()
    }
}

pub const CONDITION_GRID: usize = 101;

fn sampled_min(f: impl Fn(f64, f64) -> f64, required: f64) -> SampledMinimum {
    let mut best = SampledMinimum {
        value: f64::INFINITY,
        at: [0.0, 0.0],
        required,
    };
    let h = 1.0 / (CONDITION_GRID - 1) as f64;
    for j in 0..CONDITION_GRID {
        for i in 0..CONDITION_GRID {
            let (x, y) = (i as f64 * h, j as f64 * h);
            let v = f(x, y);
            if v < best.value {
                best.value = v;
                best.at = [x, y];
            }
        }
    }
    best
}

/// Samples `b1 >= beta1`, `b2 >= beta2` and `c + (∇·b)/2 >= gamma` on a 101 x 101 grid.
pub fn verify_coefficient_conditions(problem: &ProblemSpec) -> CoefficientReport {
    CoefficientReport {
        b1: sampled_min(|x, y| (problem.b1)(x, y), problem.beta1),
        b2: sampled_min(|x, y| (problem.b2)(x, y), problem.beta2),
        reaction: sampled_min(
            |x, y| (problem.c)(x, y) + 0.5 * (problem.div_b)(x, y),
            problem.gamma,
        ),
    }
}
