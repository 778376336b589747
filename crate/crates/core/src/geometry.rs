//! Boundary curves, elliptic coefficient sets and the characteristic maps that
//! turn each decomposed equation into Laplace's equation.
//!
//! Curves are closed, 2π-periodic and counterclockwise: the bounded region is
//! on the walker's left and the exterior domain D⁻ on the right. The normal
//! "into D⁻" therefore points away from the bounded region.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::quadrature::PeriodicGrid;
use crate::{Error, Result, C64};

/// Finite real Fourier series `c + Σ_k cos[k-1]·cos kθ + sin[k-1]·sin kθ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTable {
    #[serde(default, rename = "const")]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierTable {
    pub fn constant(c: f64) -> Self {
        FourierTable {
            constant: c,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn new(constant: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        FourierTable { constant, cos, sin }
    }

    /// `amp·cos(kθ)` for k ≥ 1.
    pub fn cos_mode(k: usize, amp: f64) -> Self {
        let mut cos = vec![0.0; k];
        cos[k - 1] = amp;
        FourierTable {
            constant: 0.0,
            cos,
            sin: Vec::new(),
        }
    }

    /// `amp·sin(kθ)` for k ≥ 1.
    pub fn sin_mode(k: usize, amp: f64) -> Self {
        let mut sin = vec![0.0; k];
        sin[k - 1] = amp;
        FourierTable {
            constant: 0.0,
            cos: Vec::new(),
            sin,
        }
    }

    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.cos.iter().all(|&c| c == 0.0) && self.sin.iter().all(|&s| s == 0.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_derivative(theta, 0)
    }

    /// Value of the `order`-th θ-derivative.
    pub fn eval_derivative(&self, theta: f64, order: u32) -> f64 {
        let mut acc = if order == 0 { self.constant } else { 0.0 };
        for k in 1..=self.degree() {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            let scale = kf.powi(order as i32);
            // d/dθ rotates (cos, sin) -> (-sin, cos)
            let (dc, ds) = match order % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            acc += scale * (a * dc + b * ds);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveKind {
    UnitCircle,
    Trigonometric { x: FourierTable, y: FourierTable },
}

/// Smooth closed boundary curve `t(θ)`, θ ∈ [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    kind: CurveKind,
}

/// Local frame of the curve at a parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    /// `t′(θ)`.
    pub tangent: C64,
    /// `|t′(θ)|`, the arc-length element per unit θ.
    pub speed: f64,
    /// Unit normal pointing from S into D⁻.
    pub normal: C64,
}

const VALIDATION_SAMPLES: usize = 512;

impl Curve {
    pub fn unit_circle() -> Self {
        Curve {
            kind: CurveKind::UnitCircle,
        }
    }

    /// Axis-aligned ellipse `x = a cos θ, y = b sin θ`.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Curve::trigonometric(FourierTable::cos_mode(1, a), FourierTable::sin_mode(1, b))
    }

    /// Star-shaped curve `r(θ) = 1 + eps·cos(kθ)` written as a trigonometric table.
    pub fn star(eps: f64, k: usize) -> Result<Self> {
        // r cos θ = cos θ + eps/2 (cos (k+1)θ + cos (k-1)θ), same for sin
        let mut x = FourierTable::cos_mode(1, 1.0);
        let mut y = FourierTable::sin_mode(1, 1.0);
        let grow = |v: &mut Vec<f64>, m: usize| {
            if v.len() < m {
                v.resize(m, 0.0);
            }
        };
        grow(&mut x.cos, k + 1);
        grow(&mut y.sin, k + 1);
        x.cos[k] += 0.5 * eps;
        y.sin[k] += 0.5 * eps;
        if k >= 2 {
            x.cos[k - 2] += 0.5 * eps;
            y.sin[k - 2] -= 0.5 * eps;
        } else {
            // k == 1: cos 0θ term is a constant shift
            x.constant += 0.5 * eps;
        }
        Curve::trigonometric(x, y)
    }

    /// Builds a trigonometric curve and checks that it is non-degenerate,
    /// counterclockwise and avoids the origin.
    pub fn trigonometric(x: FourierTable, y: FourierTable) -> Result<Self> {
        let curve = Curve {
            kind: CurveKind::Trigonometric { x, y },
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn from_kind(kind: CurveKind) -> Result<Self> {
        match kind {
            CurveKind::UnitCircle => Ok(Curve::unit_circle()),
            CurveKind::Trigonometric { x, y } => Curve::trigonometric(x, y),
        }
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn is_unit_circle(&self) -> bool {
        matches!(self.kind, CurveKind::UnitCircle)
    }

    fn validate(&self) -> Result<()> {
        let m = VALIDATION_SAMPLES;
        let h = 2.0 * PI / m as f64;
        let mut max_speed: f64 = 0.0;
        let mut area = 0.0;
        let mut min_origin = f64::INFINITY;
        let mut slowest = (0.0, f64::INFINITY);
        for i in 0..m {
            let theta = i as f64 * h;
            let p = self.point(theta);
            let d = self.derivative(theta);
            let speed = d.norm();
            max_speed = max_speed.max(speed);
            if speed < slowest.1 {
                slowest = (theta, speed);
            }
            area += 0.5 * (p.re * d.im - p.im * d.re) * h;
            min_origin = min_origin.min(p.norm());
        }
        if !(slowest.1 > 1e-10 * max_speed.max(1e-300)) {
            return Err(Error::DegenerateCurve {
                theta: slowest.0,
                speed: slowest.1,
            });
        }
        if area <= 0.0 {
            return Err(Error::WrongOrientation { area });
        }
        if min_origin < 1e-8 {
            return Err(Error::CurveThroughOrigin { distance: min_origin });
        }
        Ok(())
    }

    /// `t(θ)`.
    pub fn point(&self, theta: f64) -> C64 {
        match &self.kind {
            CurveKind::UnitCircle => C64::new(theta.cos(), theta.sin()),
            CurveKind::Trigonometric { x, y } => C64::new(x.eval(theta), y.eval(theta)),
        }
    }

    /// `t′(θ)`.
    pub fn derivative(&self, theta: f64) -> C64 {
        match &self.kind {
            CurveKind::UnitCircle => C64::new(-theta.sin(), theta.cos()),
            CurveKind::Trigonometric { x, y } => C64::new(x.eval_derivative(theta, 1), y.eval_derivative(theta, 1)),
        }
    }

    /// `t″(θ)`.
    pub fn second_derivative(&self, theta: f64) -> C64 {
        match &self.kind {
            CurveKind::UnitCircle => C64::new(-theta.cos(), -theta.sin()),
            CurveKind::Trigonometric { x, y } => C64::new(x.eval_derivative(theta, 2), y.eval_derivative(theta, 2)),
        }
    }

    pub fn frame(&self, theta: f64) -> Result<Frame> {
        let tangent = self.derivative(theta);
        let speed = tangent.norm();
        if !(speed > 1e-12) {
            return Err(Error::DegenerateCurve { theta, speed });
        }
        let normal = match self.kind {
            CurveKind::UnitCircle => C64::new(theta.cos(), theta.sin()),
            // (y′, −x′)/|t′|: right-hand normal of a counterclockwise curve
            _ => C64::new(tangent.im, -tangent.re) / speed,
        };
        Ok(Frame { tangent, speed, normal })
    }

    /// Winding number of the curve about `z`, from unwrapped phase increments.
    pub fn winding_number(&self, z: C64) -> i64 {
        let m = 4 * VALIDATION_SAMPLES;
        let h = 2.0 * PI / m as f64;
        let mut total = 0.0;
        let mut prev = self.point(0.0) - z;
        for i in 1..=m {
            let cur = self.point(i as f64 * h) - z;
            total += (cur / prev).arg();
            prev = cur;
        }
        (total / (2.0 * PI)).round() as i64
    }

    /// True when `z` lies in the unbounded component D⁻ (not on S).
    pub fn in_exterior(&self, z: C64) -> bool {
        self.winding_number(z) == 0
    }

    pub fn sample(&self, grid: &PeriodicGrid) -> SampledCurve {
        SampledCurve::new(self, grid)
    }
}

/// Curve data on a periodic grid: points, first and second θ-derivatives.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub grid: PeriodicGrid,
    pub points: Vec<C64>,
    pub d1: Vec<C64>,
    pub d2: Vec<C64>,
}

impl SampledCurve {
    pub fn new(curve: &Curve, grid: &PeriodicGrid) -> Self {
        let thetas = grid.nodes();
        SampledCurve {
            grid: grid.clone(),
            points: thetas.iter().map(|&t| curve.point(t)).collect(),
            d1: thetas.iter().map(|&t| curve.derivative(t)).collect(),
            d2: thetas.iter().map(|&t| curve.second_derivative(t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `|t′(θ_i)|`.
    pub fn speed(&self, i: usize) -> f64 {
        self.d1[i].norm()
    }

    pub fn max_speed(&self) -> f64 {
        self.d1.iter().map(|d| d.norm()).fold(0.0, f64::max)
    }

    /// Minimum distance from `z` to the sample nodes.
    pub fn distance_to(&self, z: C64) -> f64 {
        self.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Image of the sampled curve under an affine characteristic map; tangent
    /// vectors transform with the linear part of the map.
    pub fn mapped(&self, map: &CharacteristicMap) -> SampledCurve {
        SampledCurve {
            grid: self.grid.clone(),
            points: self.points.iter().map(|&p| map.linear(p)).collect(),
            d1: self.d1.iter().map(|&d| map.linear(d)).collect(),
            d2: self.d2.iter().map(|&d| map.linear(d)).collect(),
        }
    }
}

/// Image of `curve` on `grid` under `map` (the curve S_j of component j).
pub fn image_curve(curve: &Curve, grid: &PeriodicGrid, map: &CharacteristicMap) -> SampledCurve {
    SampledCurve::new(curve, grid).mapped(map)
}

/// Per-component constants of `a u_xx + 2b u_xy + c u_yy = 0` with `δ = sqrt(ac − b²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    delta: Vec<f64>,
}

impl EllipticCoefficients {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.len() != c.len() || a.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient arrays have lengths {}, {}, {}",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        let mut delta = Vec::with_capacity(a.len());
        for j in 0..a.len() {
            let disc = a[j] * c[j] - b[j] * b[j];
            if !(a[j] > 0.0) || !(disc > 0.0) {
                return Err(Error::NotElliptic {
                    component: j,
                    a: a[j],
                    discriminant: disc,
                });
            }
            delta.push(disc.sqrt());
        }
        Ok(EllipticCoefficients { a, b, c, delta })
    }

    /// `n` copies of the Laplacian.
    pub fn laplace(n: usize) -> Self {
        EllipticCoefficients::new(vec![1.0; n], vec![0.0; n], vec![1.0; n]).expect("laplace is elliptic")
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self, j: usize) -> f64 {
        self.a[j]
    }
    pub fn b(&self, j: usize) -> f64 {
        self.b[j]
    }
    pub fn c(&self, j: usize) -> f64 {
        self.c[j]
    }
    pub fn delta(&self, j: usize) -> f64 {
        self.delta[j]
    }

    pub fn map(&self, j: usize) -> CharacteristicMap {
        CharacteristicMap::new(self, j)
    }

    pub fn maps(&self) -> Vec<CharacteristicMap> {
        (0..self.len()).map(|j| self.map(j)).collect()
    }
}

/// Affine map `(x, y) ↦ z_j = x_j + i y_j` with
/// `x_j = x/√a`, `y_j = (√a/δ) y − (b/(δ√a)) x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicMap {
    pub component: usize,
    sqrt_a: f64,
    b: f64,
    delta: f64,
}

impl CharacteristicMap {
    pub fn new(coeffs: &EllipticCoefficients, j: usize) -> Self {
        CharacteristicMap {
            component: j,
            sqrt_a: coeffs.a(j).sqrt(),
            b: coeffs.b(j),
            delta: coeffs.delta(j),
        }
    }

    pub fn forward(&self, x: f64, y: f64) -> C64 {
        C64::new(
            x / self.sqrt_a,
            (self.sqrt_a * y - self.b * x / self.sqrt_a) / self.delta,
        )
    }

    pub fn inverse(&self, zj: C64) -> (f64, f64) {
        let x = self.sqrt_a * zj.re;
        let y = (self.delta * zj.im + self.b * zj.re) / self.sqrt_a;
        (x, y)
    }

    /// Same map acting on a point or vector written as a complex number.
    pub fn linear(&self, v: C64) -> C64 {
        self.forward(v.re, v.im)
    }

    /// `∂z_j/∂x = 1/√a − i b/(δ√a)`.
    pub fn dz_dx(&self) -> C64 {
        C64::new(1.0 / self.sqrt_a, -self.b / (self.delta * self.sqrt_a))
    }

    /// `∂z_j/∂y = i √a/δ`.
    pub fn dz_dy(&self) -> C64 {
        C64::new(0.0, self.sqrt_a / self.delta)
    }

    pub fn jacobian_det(&self) -> f64 {
        1.0 / self.delta
    }
}

/// Evidence that a system fails to be elliptic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipticityWitness {
    /// A real root λ of `det(Aλ² + 2Bλ + C)`.
    RealRoot(f64),
    /// `det A = 0`: the characteristic form vanishes in the direction λ → ∞.
    Infinity,
    /// The characteristic determinant vanishes identically.
    Identically,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipticity {
    pub elliptic: bool,
    pub witness: Option<EllipticityWitness>,
    /// Coefficients of `det(Aλ² + 2Bλ + C)` in increasing powers of λ.
    pub polynomial: Vec<f64>,
}

fn det_complex(m: DMatrix<C64>) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.lu().determinant()
}

/// Characteristic determinant `det(Aλ² + 2Bλ + C)` at a complex λ.
pub fn characteristic_det(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, lambda: C64) -> C64 {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        C64::from(a[(i, j)]) * lambda * lambda + C64::from(2.0 * b[(i, j)]) * lambda + C64::from(c[(i, j)])
    });
    det_complex(m)
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Decides whether `det(Aλ² + 2Bλ + C)` has a real root.
///
/// The determinant is recovered as a polynomial of degree ≤ 2n by sampling it
/// on roots of unity; its roots come from the companion matrix. A root is
/// accepted as real when the polynomial is negligible at its real part. A
/// sign-change scan on a real grid backs this up.
pub fn ellipticity_check(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Ellipticity> {
    let n = a.nrows();
    for (name, m) in [("A", a), ("B", b), ("C", c)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let deg = 2 * n;
    let samples = deg + 1;
    let values: Vec<C64> = (0..samples)
        .map(|k| {
            let lambda = C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
            characteristic_det(a, b, c, lambda)
        })
        .collect();
    let mut poly: Vec<f64> = (0..=deg)
        .map(|d| {
            let s: C64 = values
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * PI * (k * d) as f64 / samples as f64))
                .sum();
            s.re / samples as f64
        })
        .collect();
    let scale = poly.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Ok(Ellipticity {
            elliptic: false,
            witness: Some(EllipticityWitness::Identically),
            polynomial: poly,
        });
    }
    for v in poly.iter_mut() {
        if v.abs() <= 1e-14 * scale {
            *v = 0.0;
        }
    }
    let lead = poly.iter().rposition(|&v| v != 0.0).unwrap_or(0);
    if lead < deg {
        return Ok(Ellipticity {
            elliptic: false,
            witness: Some(EllipticityWitness::Infinity),
            polynomial: poly,
        });
    }

    let magnitude = |x: f64| {
        poly.iter()
            .enumerate()
            .map(|(k, c)| c.abs() * x.abs().powi(k as i32))
            .sum::<f64>()
    };

    // companion matrix of the monic polynomial
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -poly[i] / poly[deg];
    }
    // repeated roots can stall the QR iteration, so it is capped; the scan below still runs
    let roots = nalgebra::linalg::Schur::try_new(comp, f64::EPSILON, 10_000)
        .map(|s| s.complex_eigenvalues().iter().copied().collect::<Vec<_>>())
        .unwrap_or_default();
    let mut witness = None;
    for r in roots.iter() {
        if r.im.abs() <= 1e-6 * r.norm().max(1.0) {
            let x = r.re;
            if poly_eval(&poly, x).abs() <= 1e-10 * magnitude(x) {
                witness = Some(EllipticityWitness::RealRoot(x));
                break;
            }
        }
    }
    if witness.is_none() {
        let steps = 4000;
        let bound = 1e3;
        let mut prev_x = -bound;
        let mut prev = poly_eval(&poly, prev_x);
        for i in 1..=steps {
            let x = -bound + 2.0 * bound * i as f64 / steps as f64;
            let v = poly_eval(&poly, x);
            if v == 0.0 || prev.signum() != v.signum() {
                witness = Some(EllipticityWitness::RealRoot(if v == 0.0 {
                    x
                } else {
                    0.5 * (x + prev_x)
                }));
                break;
            }
            prev = v;
            prev_x = x;
        }
    }
    Ok(Ellipticity {
        elliptic: witness.is_none(),
        witness,
        polynomial: poly,
    })
}

/// Diagonal coefficient matrices of a decomposable system.
pub fn decomposable_matrices(coeffs: &EllipticCoefficients) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = coeffs.len();
    let diag = |f: &dyn Fn(usize) -> f64| DMatrix::from_fn(n, n, |i, j| if i == j { f(i) } else { 0.0 });
    (diag(&|j| coeffs.a(j)), diag(&|j| coeffs.b(j)), diag(&|j| coeffs.c(j)))
}

/// Coefficient matrices of the Bitsadze system `∂²w/∂z̄² = 0` written for `(u₁, u₂)`.
pub fn bitsadze_matrices() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let a = DMatrix::identity(2, 2);
    let b = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let c = -DMatrix::identity(2, 2);
    (a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn unit_circle_points() {
        let c = Curve::unit_circle();
        assert!(close(c.point(0.0), C64::new(1.0, 0.0), 1e-15));
        assert!(close(c.point(PI / 2.0), C64::new(0.0, 1.0), 1e-15));
        assert!(close(c.point(0.0), c.point(2.0 * PI), 1e-15));
    }

    #[test]
    fn ellipse_point_at_pi() {
        let c = Curve::ellipse(2.0, 1.0).unwrap();
        assert!(close(c.point(PI), C64::new(-2.0, 0.0), 1e-15));
    }

    #[test]
    fn frames() {
        let c = Curve::unit_circle();
        let f = c.frame(0.0).unwrap();
        assert!(close(f.tangent, C64::new(0.0, 1.0), 1e-15));
        assert_eq!(f.normal, C64::new(1.0, 0.0));
        let f = c.frame(PI / 2.0).unwrap();
        assert!(close(f.tangent, C64::new(-1.0, 0.0), 1e-15));
        assert!(close(f.normal, C64::new(0.0, 1.0), 1e-15));

        let e = Curve::ellipse(2.0, 1.0).unwrap();
        let f = e.frame(0.0).unwrap();
        assert!(close(f.normal, C64::new(1.0, 0.0), 1e-15));
        for k in 0..16 {
            let th = 0.4 * k as f64;
            let f = e.frame(th).unwrap();
            assert!((f.normal.norm() - 1.0).abs() < 1e-14);
            assert!((f.normal.re * f.tangent.re + f.normal.im * f.tangent.im).abs() < 1e-14);
            // points away from the bounded region
            assert!(e.in_exterior(e.point(th) + 1e-3 * f.normal));
        }
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(matches!(Curve::ellipse(1.0, -1.0), Err(Error::WrongOrientation { .. })));
        assert!(matches!(
            Curve::trigonometric(FourierTable::cos_mode(1, 1.0), FourierTable::cos_mode(1, 1.0)),
            Err(Error::DegenerateCurve { .. }) | Err(Error::WrongOrientation { .. })
        ));
        let shifted = FourierTable::new(1.0, vec![1.0], vec![]);
        assert!(matches!(
            Curve::trigonometric(shifted, FourierTable::sin_mode(1, 1.0)),
            Err(Error::CurveThroughOrigin { .. })
        ));
    }

    #[test]
    fn fourier_derivatives_match_finite_differences() {
        let t = FourierTable::new(0.3, vec![1.0, -0.2, 0.05], vec![0.4, 0.0, 0.1]);
        let h = 1e-5;
        for k in 0..10 {
            let th = 0.7 * k as f64;
            let fd1 = (t.eval(th + h) - t.eval(th - h)) / (2.0 * h);
            let fd2 = (t.eval(th + h) - 2.0 * t.eval(th) + t.eval(th - h)) / (h * h);
            assert!((fd1 - t.eval_derivative(th, 1)).abs() < 1e-8);
            assert!((fd2 - t.eval_derivative(th, 2)).abs() < 1e-4);
        }
    }

    #[test]
    fn star_matches_polar_form() {
        let s = Curve::star(0.3, 5).unwrap();
        for k in 0..20 {
            let th = 0.31 * k as f64;
            let r = 1.0 + 0.3 * (5.0 * th).cos();
            assert!(close(s.point(th), C64::from_polar(r, th), 1e-14));
        }
        let s1 = Curve::star(0.2, 1).unwrap();
        let th = 1.1;
        assert!(close(s1.point(th), C64::from_polar(1.0 + 0.2 * th.cos(), th), 1e-14));
    }

    #[test]
    fn characteristic_forward_examples() {
        let id = EllipticCoefficients::laplace(1).map(0);
        assert_eq!(id.forward(3.0, 4.0), C64::new(3.0, 4.0));
        let m = EllipticCoefficients::new(vec![1.0], vec![1.0], vec![2.0])
            .unwrap()
            .map(0);
        assert!(close(m.forward(1.0, 1.0), C64::new(1.0, 0.0), 1e-15));
        let m = EllipticCoefficients::new(vec![4.0], vec![0.0], vec![1.0])
            .unwrap()
            .map(0);
        assert!(close(m.forward(1.0, 1.0), C64::new(0.5, 1.0), 1e-15));
    }

    #[test]
    fn image_of_circle_under_scaling_is_ellipse() {
        let coeffs = EllipticCoefficients::new(vec![4.0], vec![0.0], vec![1.0]).unwrap();
        let grid = PeriodicGrid::new(32).unwrap();
        let img = image_curve(&Curve::unit_circle(), &grid, &coeffs.map(0));
        for (i, th) in grid.nodes().into_iter().enumerate() {
            assert!(close(img.points[i], C64::new(0.5 * th.cos(), th.sin()), 1e-14));
            let expected_speed = C64::new(-0.5 * th.sin(), th.cos()).norm();
            assert!((img.speed(i) - expected_speed).abs() < 1e-14);
        }
    }

    #[test]
    fn non_elliptic_coefficients_rejected() {
        assert!(matches!(
            EllipticCoefficients::new(vec![1.0], vec![1.0], vec![1.0]),
            Err(Error::NotElliptic { component: 0, .. })
        ));
        assert!(EllipticCoefficients::new(vec![-1.0], vec![0.0], vec![-1.0]).is_err());
    }

    #[test]
    fn bitsadze_is_elliptic() {
        let (a, b, c) = bitsadze_matrices();
        let e = ellipticity_check(&a, &b, &c).unwrap();
        assert!(e.elliptic);
        // (λ² + 1)² = 1 + 2λ² + λ⁴
        let expected = [1.0, 0.0, 2.0, 0.0, 1.0];
        for (p, q) in e.polynomial.iter().zip(expected) {
            assert!((p - q).abs() < 1e-13);
        }
        assert!((characteristic_det(&a, &b, &c, C64::from(1.0)) - C64::from(4.0)).norm() < 1e-14);
    }

    #[test]
    fn scalar_ellipticity() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let zero = DMatrix::from_element(1, 1, 0.0);
        assert!(ellipticity_check(&one, &zero, &one).unwrap().elliptic);
        let e = ellipticity_check(&one, &one, &one).unwrap();
        assert!(!e.elliptic);
        match e.witness {
            Some(EllipticityWitness::RealRoot(x)) => assert!((x + 1.0).abs() < 1e-6),
            other => panic!("unexpected witness {other:?}"),
        }
        let e = ellipticity_check(&zero, &one, &one).unwrap();
        assert_eq!(e.witness, Some(EllipticityWitness::Infinity));
        assert_eq!(
            ellipticity_check(&zero, &zero, &zero).unwrap().witness,
            Some(EllipticityWitness::Identically)
        );
    }

    #[test]
    fn dimension_mismatch() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DMatrix::<f64>::identity(1, 1);
        assert!(matches!(
            ellipticity_check(&a, &b, &a),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
