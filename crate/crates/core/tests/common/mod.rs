#![allow(dead_code)]

use std::sync::Arc;

use layerfem::problems::ScalarFn;
use layerfem::ProblemSpec;

/// Exact fraction with `i128` parts, always reduced, positive denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q {
    pub n: i128,
    pub d: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Q {
    pub fn new(n: i128, d: i128) -> Self {
        assert!(d != 0);
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Q { n: s * n / g, d: s * d / g }
    }

    pub fn int(n: i128) -> Self {
        Q { n, d: 1 }
    }

    pub fn add(self, o: Q) -> Q {
        Q::new(self.n * o.d + o.n * self.d, self.d * o.d)
    }

    pub fn mul(self, o: Q) -> Q {
        Q::new(self.n * o.n, self.d * o.d)
    }

    pub fn to_f64(self) -> f64 {
        self.n as f64 / self.d as f64
    }
}

/// Polynomial in `t` on `[0, 1]`, coefficients by ascending power.
pub type Poly = Vec<Q>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Q::int(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(x.mul(*y));
        }
    }
    out
}

fn poly_deriv(a: &Poly) -> Poly {
    if a.len() == 1 {
        return vec![Q::int(0)];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul(Q::int(i as i128)))
        .collect()
}

/// Lagrange polynomial of degree `k` on nodes `r/k` equal to 1 at `s/k`:
/// prod_{r != s} (k t - r) / (s - r).
pub fn lagrange(k: usize, s: usize) -> Poly {
    let mut p = vec![Q::int(1)];
    for r in (0..=k).filter(|&r| r != s) {
        let denom = s as i128 - r as i128;
        p = poly_mul(&p, &vec![Q::new(-(r as i128), denom), Q::new(k as i128, denom)]);
    }
    p
}

/// Integral over [0, 1] of `t^m p(t)`.
fn moment(p: &Poly, m: usize) -> Q {
    p.iter()
        .enumerate()
        .fold(Q::int(0), |acc, (i, c)| acc.add(c.mul(Q::new(1, (i + m + 1) as i128))))
}

/// 1D integrals needed by the element oracle, indexed `[a][b]` (test `a`, trial `b`).
pub struct Moments1D {
    /// ∫ t^m φ_b φ_a for m = 0, 1
    pub mass: [Vec<Vec<Q>>; 2],
    /// ∫ t^m φ_b' φ_a for m = 0, 1
    pub adv: [Vec<Vec<Q>>; 2],
    /// ∫ φ_b' φ_a'
    pub stiff: Vec<Vec<Q>>,
}

pub fn moments(k: usize) -> Moments1D {
    let basis: Vec<Poly> = (0..=k).map(|s| lagrange(k, s)).collect();
    let ders: Vec<Poly> = basis.iter().map(poly_deriv).collect();
    let table = |f: &dyn Fn(usize, usize) -> Q| -> Vec<Vec<Q>> {
        (0..=k).map(|a| (0..=k).map(|b| f(a, b)).collect()).collect()
    };
    Moments1D {
        mass: [
            table(&|a, b| moment(&poly_mul(&basis[b], &basis[a]), 0)),
            table(&|a, b| moment(&poly_mul(&basis[b], &basis[a]), 1)),
        ],
        adv: [
            table(&|a, b| moment(&poly_mul(&ders[b], &basis[a]), 0)),
            table(&|a, b| moment(&poly_mul(&ders[b], &basis[a]), 1)),
        ],
        stiff: table(&|a, b| moment(&poly_mul(&ders[b], &ders[a]), 0)),
    }
}

/// Affine coefficient `c0 + cx x + cy y`.
#[derive(Debug, Clone, Copy)]
pub struct Affine {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Affine {
    pub fn constant(c0: f64) -> Self {
        Affine { c0, cx: 0.0, cy: 0.0 }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.c0 + self.cx * x + self.cy * y
    }

    pub fn scalar_fn(self) -> ScalarFn {
        Arc::new(move |x, y| self.eval(x, y))
    }
}

/// Element matrix of `eps (grad u, grad v) - (b . grad u, v) + c (u, v)` on
/// `[x0, x0+hx] x [y0, y0+hy]` for affine `b` and constant `c`, from exact
/// polynomial moments. Local index `t (k+1) + s`, rows are test functions.
pub fn oracle_element_matrix(
    k: usize,
    eps: f64,
    b1: Affine,
    b2: Affine,
    c: f64,
    rect: [f64; 4],
) -> Vec<f64> {
    let mo = moments(k);
    let [x0, hx, y0, hy] = rect;
    let nb = (k + 1) * (k + 1);
    let mut m = vec![0.0; nb * nb];
    let f = |q: &Q| q.to_f64();
    for ta in 0..=k {
        for sa in 0..=k {
            for tb in 0..=k {
                for sb in 0..=k {
                    let mx = |p: usize| f(&mo.mass[p][sa][sb]);
                    let my = |p: usize| f(&mo.mass[p][ta][tb]);
                    let ax = |p: usize| f(&mo.adv[p][sa][sb]);
                    let ay = |p: usize| f(&mo.adv[p][ta][tb]);
                    let diffusion = eps * (hy / hx * f(&mo.stiff[sa][sb]) * my(0) + hx / hy * mx(0) * f(&mo.stiff[ta][tb]));
                    // b at (x0 + hx t, y0 + hy u) = b(x0, y0) + cx hx t + cy hy u
                    let t1 = hy * (b1.eval(x0, y0) * ax(0) * my(0) + b1.cx * hx * ax(1) * my(0) + b1.cy * hy * ax(0) * my(1));
                    let t2 = hx * (b2.eval(x0, y0) * mx(0) * ay(0) + b2.cx * hx * mx(1) * ay(0) + b2.cy * hy * mx(0) * ay(1));
                    let reaction = c * hx * hy * mx(0) * my(0);
                    m[(ta * (k + 1) + sa) * nb + tb * (k + 1) + sb] = diffusion - t1 - t2 + reaction;
                }
            }
        }
    }
    m
}

/// Problem with affine convection, constant reaction and zero forcing.
pub fn affine_problem(eps: f64, b1: Affine, b2: Affine, c: f64) -> ProblemSpec {
    ProblemSpec {
        name: "affine".into(),
        epsilon: eps,
        b1: b1.scalar_fn(),
        b2: b2.scalar_fn(),
        c: Arc::new(move |_, _| c),
        div_b: Arc::new(move |_, _| b1.cx + b2.cy),
        f: Arc::new(|_, _| 0.0),
        exact: None,
        beta1: 1.0,
        beta2: 1.0,
        gamma: c,
    }
}

pub fn benchmark_b() -> (Affine, Affine) {
    (
        Affine { c0: 2.0, cx: 2.0, cy: -1.0 },
        Affine { c0: 3.0, cx: -1.0, cy: 2.0 },
    )
}

/// Largest entrywise difference scaled by the largest entry of `reference`.
pub fn max_rel_diff(a: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(reference)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}
