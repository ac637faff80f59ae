//! Layer-adapted meshes on the unit interval and their tensor products.
//!
//! Two graded families are provided:
//!
//! * the Bakhvalov-type mesh, logarithmically graded on `[0, x_{N/2}]` by the
//!   generating function `phi(t) = -ln(1 - 2(1 - eps) t)` and equidistant on
//!   `[x_{N/2}, 1]`;
//! * the Bakhvalov–Shishkin mesh, graded by
//!   `-((k+1) eps / beta) ln((N^2 - 2i(N-1)) / N^2)` up to a Shishkin-type
//!   transition point `((k+1) eps / beta) ln N`, uniform beyond it.
//!
//! The layer sits at coordinate 0 in every direction.

use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest element count accepted by the builders.
pub const MIN_ELEMENTS: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("element count N = {0} must be even and at least {MIN_ELEMENTS}")]
    InvalidElementCount(usize),
    #[error("perturbation parameter eps = {0} must lie in (0, 1)")]
    InvalidEpsilon(f64),
    #[error("decay rate beta = {0} must be positive and finite")]
    InvalidBeta(f64),
    #[error("grading exponent sigma = {sigma} is below k + 1 = {min}")]
    SigmaTooSmall { sigma: f64, min: f64 },
    #[error("mesh variant {found} passed to the {expected} builder")]
    WrongVariant {
        expected: MeshVariant,
        found: MeshVariant,
    },
    #[error("logarithm argument {arg} is not positive at mesh index {index}")]
    NonPositiveLogArgument { index: usize, arg: f64 },
    #[error("mesh points must start at 0, end at 1 and increase strictly (violated at index {0})")]
    InvalidPoints(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshVariant {
    BakhvalovType,
    BakhvalovShishkin,
}

impl MeshVariant {
    pub fn label(self) -> &'static str {
        match self {
            MeshVariant::BakhvalovType => "bakhvalov",
            MeshVariant::BakhvalovShishkin => "bakhvalov-shishkin",
        }
    }
}

impl fmt::Display for MeshVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parameters of a graded 1D mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    /// Number of elements.
    pub n: usize,
    pub epsilon: f64,
    /// Grading exponent; only used by the Bakhvalov-type mesh.
    pub sigma: f64,
    /// Layer decay rate of the direction this mesh resolves.
    pub beta: f64,
    pub variant: MeshVariant,
}

impl MeshConfig {
    pub fn new(n: usize, epsilon: f64, sigma: f64, beta: f64, variant: MeshVariant) -> Self {
        Self {
            n,
            epsilon,
            sigma,
            beta,
            variant,
        }
    }

    /// Bakhvalov-type configuration with the smallest admissible grading `sigma = k + 1`.
    pub fn bakhvalov(n: usize, epsilon: f64, k: usize, beta: f64) -> Self {
        Self::new(n, epsilon, (k + 1) as f64, beta, MeshVariant::BakhvalovType)
    }

    pub fn bakhvalov_shishkin(n: usize, epsilon: f64, k: usize, beta: f64) -> Self {
        Self::new(
            n,
            epsilon,
            (k + 1) as f64,
            beta,
            MeshVariant::BakhvalovShishkin,
        )
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.n < MIN_ELEMENTS || self.n % 2 != 0 {
            return Err(MeshError::InvalidElementCount(self.n));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(MeshError::InvalidEpsilon(self.epsilon));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(MeshError::InvalidBeta(self.beta));
        }
        Ok(())
    }

    /// Whether `eps <= 1/N`, the regime the mesh estimates are stated for.
    pub fn satisfies_eps_bound(&self) -> bool {
        self.epsilon * self.n as f64 <= 1.0
    }

    fn warn_outside_regime(&self) {
        if self.n < 4 {
            warn!("N = {} is below 4; mesh estimates are not applicable", self.n);
        }
        if !self.satisfies_eps_bound() {
            warn!(
                "eps = {:e} exceeds 1/N = {:e}; building the mesh anyway",
                self.epsilon,
                1.0 / self.n as f64
            );
        }
    }
}

/// Ordered mesh points `0 = x_0 < ... < x_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    points: Vec<f64>,
}

impl Mesh1D {
    pub fn from_points(points: Vec<f64>) -> Result<Self, MeshError> {
        if points.len() < 2 {
            return Err(MeshError::InvalidPoints(0));
        }
        if points[0] != 0.0 {
            return Err(MeshError::InvalidPoints(0));
        }
        let last = points.len() - 1;
        if points[last] != 1.0 {
            return Err(MeshError::InvalidPoints(last));
        }
        if let Some(i) = points.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(MeshError::InvalidPoints(i + 1));
        }
        Ok(Self { points })
    }

    pub fn uniform(n: usize) -> Self {
        let mut points: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        points[n] = 1.0;
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn num_elements(&self) -> usize {
        self.points.len() - 1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.points[i + 1] - self.points[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index of the element containing `x`; points on interior mesh lines go to the right element.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(0.0..=1.0).contains(&x) {
            return None;
        }
        let n = self.num_elements();
        let idx = self.points.partition_point(|&p| p <= x);
        Some(idx.saturating_sub(1).min(n - 1))
    }
}

/// Tensor-product mesh with elements `[x_i, x_{i+1}] x [y_j, y_{j+1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMesh {
    pub x: Mesh1D,
    pub y: Mesh1D,
}

impl TensorMesh {
    pub fn new(x: Mesh1D, y: Mesh1D) -> Self {
        Self { x, y }
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(Mesh1D::uniform(n), Mesh1D::uniform(n))
    }

    pub fn num_elements(&self) -> (usize, usize) {
        (self.x.num_elements(), self.y.num_elements())
    }
}

/// Argument of the logarithm in `phi(i/N)`, written as `((N - 2i) + 2 i eps) / N`
/// so that no cancellation occurs near the transition point.
fn bakhvalov_log_argument(i: usize, n: usize, eps: f64) -> f64 {
    ((n - 2 * i) as f64 + 2.0 * i as f64 * eps) / n as f64
}

fn coarse_completion(points: &mut [f64], n: usize) {
    let transition = points[n / 2];
    for i in n / 2 + 1..n {
        points[i] = 1.0 - (1.0 - transition) * 2.0 * (n - i) as f64 / n as f64;
    }
    points[n] = 1.0;
}

fn finish(mut points: Vec<f64>, n: usize) -> Result<Mesh1D, MeshError> {
    coarse_completion(&mut points, n);
    Mesh1D::from_points(points)
}

pub fn build_bakhvalov_1d(config: &MeshConfig) -> Result<Mesh1D, MeshError> {
    config.validate()?;
    if config.variant != MeshVariant::BakhvalovType {
        return Err(MeshError::WrongVariant {
            expected: MeshVariant::BakhvalovType,
            found: config.variant,
        });
    }
    config.warn_outside_regime();
    let n = config.n;
    let scale = config.sigma * config.epsilon / config.beta;
    let mut points = vec![0.0; n + 1];
    for (i, p) in points.iter_mut().enumerate().take(n / 2 + 1) {
        let arg = bakhvalov_log_argument(i, n, config.epsilon);
        if !(arg > 0.0) {
            return Err(MeshError::NonPositiveLogArgument { index: i, arg });
        }
        *p = -scale * arg.ln() + 0.0;
    }
    finish(points, n)
}

pub fn build_bakhvalov_shishkin_1d(config: &MeshConfig, k: usize) -> Result<Mesh1D, MeshError> {
    config.validate()?;
    if config.variant != MeshVariant::BakhvalovShishkin {
        return Err(MeshError::WrongVariant {
            expected: MeshVariant::BakhvalovShishkin,
            found: config.variant,
        });
    }
    config.warn_outside_regime();
    let n = config.n;
    let scale = (k + 1) as f64 * config.epsilon / config.beta;
    let n2 = (n * n) as f64;
    let mut points = vec![0.0; n + 1];
    for (i, p) in points.iter_mut().enumerate().take(n / 2 + 1) {
        // N^2 - 2i(N-1) is an exact integer for every supported N.
        let arg = (n * n - 2 * i * (n - 1)) as f64 / n2;
        if !(arg > 0.0) {
            return Err(MeshError::NonPositiveLogArgument { index: i, arg });
        }
        *p = -scale * arg.ln() + 0.0;
    }
    finish(points, n)
}

/// Builds the mesh of either variant; `k` is the polynomial degree it will carry.
pub fn build_1d(config: &MeshConfig, k: usize) -> Result<Mesh1D, MeshError> {
    match config.variant {
        MeshVariant::BakhvalovType => {
            let min = (k + 1) as f64;
            if config.sigma < min {
                return Err(MeshError::SigmaTooSmall {
                    sigma: config.sigma,
                    min,
                });
            }
            build_bakhvalov_1d(config)
        }
        MeshVariant::BakhvalovShishkin => build_bakhvalov_shishkin_1d(config, k),
    }
}

pub fn build_tensor_mesh(
    cfg_x: &MeshConfig,
    cfg_y: &MeshConfig,
    k: usize,
) -> Result<TensorMesh, MeshError> {
    Ok(TensorMesh::new(build_1d(cfg_x, k)?, build_1d(cfg_y, k)?))
}

/// Outcome of one mesh-width inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

/// Measured quantity for an estimate whose constant is not specified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredRatio {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
    pub ratios: Vec<MeasuredRatio>,
    /// Checks that need more elements than the mesh has.
    pub skipped: Vec<&'static str>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn ratio(&self, name: &str) -> Option<f64> {
        self.ratios.iter().find(|r| r.name == name).map(|r| r.value)
    }

    fn check(&mut self, name: &'static str, value: f64, lower: f64, upper: f64) {
        let passed = value >= lower && value <= upper;
        self.checks.push(PropertyCheck {
            name,
            value,
            lower,
            upper,
            passed,
        });
    }
}

/// Checks the mesh-width inequalities of a Bakhvalov-type mesh.
///
/// Inequalities without explicit constants are reported as measured ratios:
/// `h_0 / (eps / N)`, `x_{N/2-1} / (sigma eps ln N)`, `x_{N/2} / (sigma eps |ln eps|)`
/// and, for `mu` in `{1, sigma}`, the maximum over `0 <= i <= N/2-2` of
/// `h_i^mu exp(-beta x_i / eps) / ((sigma eps / beta)^mu N^-mu)`.
pub fn verify_mesh_properties(mesh: &Mesh1D, config: &MeshConfig) -> PropertyReport {
    let mut report = PropertyReport::default();
    let n = mesh.num_elements();
    let h = mesh.widths();
    let x = mesh.points();
    let eps = config.epsilon;
    let sigma = config.sigma;
    let nf = n as f64;

    if n >= 4 {
        // Monotone fine widths; the value recorded is the largest decrease.
        let worst_drop = h[..=n / 2 - 2]
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0_f64, f64::max);
        report.check("fine widths non-decreasing", worst_drop, f64::NEG_INFINITY, 0.0);
        report.check(
            "h_{N/2-2} in [sigma eps/4, sigma eps]",
            h[n / 2 - 2],
            0.25 * sigma * eps,
            sigma * eps,
        );
    } else {
        report.skipped.push("fine widths non-decreasing");
        report.skipped.push("h_{N/2-2} in [sigma eps/4, sigma eps]");
    }
    report.check(
        "h_{N/2-1} in [sigma eps/2, 2 sigma/N]",
        h[n / 2 - 1],
        0.5 * sigma * eps,
        2.0 * sigma / nf,
    );
    let (coarse_min, coarse_max) = h[n / 2..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
            (lo.min(w), hi.max(w))
        });
    report.check("coarse widths >= 1/N", coarse_min, 1.0 / nf, f64::INFINITY);
    report.check("coarse widths <= 2/N", coarse_max, f64::NEG_INFINITY, 2.0 / nf);

    report.ratios.push(MeasuredRatio {
        name: "h_0 / (eps/N)".into(),
        value: h[0] / (eps / nf),
    });
    if n >= 4 {
        report.ratios.push(MeasuredRatio {
            name: "x_{N/2-1} / (sigma eps ln N)".into(),
            value: x[n / 2 - 1] / (sigma * eps * nf.ln()),
        });
    }
    report.ratios.push(MeasuredRatio {
        name: "x_{N/2} / (sigma eps |ln eps|)".into(),
        value: x[n / 2] / (sigma * eps * eps.ln().abs()),
    });
    if n >= 4 {
        let scale = sigma * eps / config.beta;
        for mu in [1.0, sigma] {
            let worst = (0..=n / 2 - 2)
                .map(|i| {
                    h[i].powf(mu) * (-config.beta * x[i] / eps).exp()
                        / (scale.powf(mu) * nf.powf(-mu))
                })
                .fold(0.0_f64, f64::max);
            report.ratios.push(MeasuredRatio {
                name: format!("max h_i^mu exp(-beta x_i/eps) / ((sigma eps/beta)^mu N^-mu), mu={mu}"),
                value: worst,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, eps: f64, sigma: f64, beta: f64) -> MeshConfig {
        MeshConfig::new(n, eps, sigma, beta, MeshVariant::BakhvalovType)
    }

    #[test]
    fn bakhvalov_endpoints_and_transition() {
        let c = cfg(8, 0.01, 2.0, 2.0);
        let m = build_bakhvalov_1d(&c).unwrap();
        assert_eq!(m.points()[0], 0.0);
        assert_eq!(m.points()[8], 1.0);
        let expected = (2.0 * 0.01 / 2.0) * -(0.01f64.ln());
        assert!((m.points()[4] - expected).abs() < 1e-16);
        assert!((m.points()[4] - 0.046_051_701_859_880_91).abs() < 1e-15);
        // -0.01 ln(1 - 2 * 0.99 * 0.125)
        assert!((m.points()[1] - 2.843_542_823_591_063e-3).abs() < 1e-15);
    }

    #[test]
    fn coarse_points_are_uniform() {
        let c = cfg(8, 0.01, 2.0, 2.0);
        let m = build_bakhvalov_1d(&c).unwrap();
        let h = m.widths();
        let expected = 2.0 * (1.0 - m.points()[4]) / 8.0;
        for w in &h[4..] {
            assert!((w - expected).abs() < 1e-15);
        }
        // x_5 = 1 - (1 - x_4) * 2 * 3 / 8
        assert!((m.points()[5] - (1.0 - (1.0 - 0.046_051_701_859_880_91) * 0.75)).abs() < 1e-15);
    }

    #[test]
    fn shishkin_variant_points() {
        let c = MeshConfig::bakhvalov_shishkin(8, 0.01, 1, 2.0);
        let m = build_bakhvalov_shishkin_1d(&c, 1).unwrap();
        assert_eq!(m.points()[0], 0.0);
        assert_eq!(m.points()[8], 1.0);
        assert!((m.points()[1] - 2.468_600_779_315_258e-3).abs() < 1e-15);
        assert!((m.points()[4] - 0.01 * 8f64.ln()).abs() < 1e-16);
    }

    #[test]
    fn wrong_variant_and_bad_n_are_rejected() {
        let c = MeshConfig::bakhvalov_shishkin(8, 0.01, 1, 2.0);
        assert!(matches!(
            build_bakhvalov_1d(&c),
            Err(MeshError::WrongVariant { .. })
        ));
        assert_eq!(
            build_bakhvalov_1d(&cfg(7, 0.01, 2.0, 2.0)),
            Err(MeshError::InvalidElementCount(7))
        );
        assert_eq!(
            build_bakhvalov_1d(&cfg(0, 0.01, 2.0, 2.0)),
            Err(MeshError::InvalidElementCount(0))
        );
        assert!(matches!(
            build_bakhvalov_1d(&cfg(8, 1.5, 2.0, 2.0)),
            Err(MeshError::InvalidEpsilon(_))
        ));
        assert!(matches!(
            build_1d(&cfg(8, 0.01, 1.5, 2.0), 1),
            Err(MeshError::SigmaTooSmall { .. })
        ));
    }

    #[test]
    fn large_eps_still_builds() {
        // eps > 1/N only warns
        let m = build_bakhvalov_1d(&cfg(8, 0.5, 2.0, 2.0)).unwrap();
        assert_eq!(m.points()[8], 1.0);
    }

    #[test]
    fn tensor_mesh_scales_with_beta() {
        let cx = cfg(8, 0.01, 2.0, 2.0);
        let cy = cfg(8, 0.01, 2.0, 1.0);
        let t = build_tensor_mesh(&cx, &cy, 1).unwrap();
        for i in 0..=4 {
            assert!((t.y.points()[i] - 2.0 * t.x.points()[i]).abs() < 1e-15);
        }
        let same = build_tensor_mesh(&cx, &cx, 1).unwrap();
        assert_eq!(same.x, same.y);
    }

    #[test]
    fn uniform_mesh_fails_layer_width_bound() {
        let c = cfg(8, 1e-4, 2.0, 2.0);
        let report = verify_mesh_properties(&Mesh1D::uniform(8), &c);
        let mono = &report.checks[0];
        assert!(mono.passed);
        let layer = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("h_{N/2-2}"))
            .unwrap();
        assert!(!layer.passed);
    }

    #[test]
    fn locate_handles_mesh_lines() {
        let m = Mesh1D::uniform(4);
        assert_eq!(m.locate(0.0), Some(0));
        assert_eq!(m.locate(0.25), Some(1));
        assert_eq!(m.locate(1.0), Some(3));
        assert_eq!(m.locate(1.2), None);
    }

    #[test]
    fn from_points_validates() {
        assert!(Mesh1D::from_points(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Mesh1D::from_points(vec![0.1, 1.0]).is_err());
        assert!(Mesh1D::from_points(vec![0.0, 0.3, 1.0]).is_ok());
    }
}
