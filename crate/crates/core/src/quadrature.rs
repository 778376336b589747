//! Periodic (trapezoidal) quadrature and Cauchy principal values on closed curves.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::geometry::SampledCurve;
use crate::{Error, Result, C64};

/// Equispaced nodes `θ_i = 2πi/N` with equal weights `2π/N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("node count must be even and ≥ 8, got {n}")));
        }
        Ok(PeriodicGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn theta(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.theta(i)).collect()
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn refined(&self, factor: usize) -> PeriodicGrid {
        PeriodicGrid { n: self.n * factor }
    }
}

/// Values on a grid, `components` values per node, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    grid: PeriodicGrid,
    components: usize,
    values: Vec<C64>,
}

impl BoundarySamples {
    pub fn new(grid: PeriodicGrid, components: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() * components {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for {} nodes × {} components",
                values.len(),
                grid.len(),
                components
            )));
        }
        Ok(BoundarySamples {
            grid,
            components,
            values,
        })
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        BoundarySamples {
            grid: grid.clone(),
            components: 1,
            values,
        }
    }

    pub fn from_real_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |t| C64::from(f(t)))
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn component(&self, j: usize) -> &[C64] {
        let n = self.grid.len();
        &self.values[j * n..(j + 1) * n]
    }

    /// `∫₀^{2π} v_j(θ) dθ`.
    pub fn integrate(&self, j: usize) -> C64 {
        integrate_periodic(self.component(j))
    }
}

/// Trapezoidal rule for a full period of equispaced samples.
pub fn integrate_periodic(values: &[C64]) -> C64 {
    let h = 2.0 * PI / values.len() as f64;
    values.iter().sum::<C64>() * h
}

fn fft_plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// Normalized Fourier coefficients `ĉ_k = (1/N) Σ_i v_i e^{-ikθ_i}`, k = 0..N-1.
pub fn fourier_coefficients(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut buf = values.to_vec();
    fft_plan(n, true).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Inverse of [`fourier_coefficients`].
pub fn synthesize(coeffs: &[C64]) -> Vec<C64> {
    let mut buf = coeffs.to_vec();
    fft_plan(buf.len(), false).process(&mut buf);
    buf
}

/// Signed wavenumber of FFT slot `k` on an `n`-point grid; Nyquist maps to `n/2`.
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// θ-derivative of a periodic sample vector by Fourier differentiation.
pub fn spectral_derivative(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut c = fourier_coefficients(values);
    for (k, ck) in c.iter_mut().enumerate() {
        if n.is_multiple_of(2) && k == n / 2 {
            *ck = C64::new(0.0, 0.0);
        } else {
            *ck *= C64::new(0.0, wavenumber(k, n) as f64);
        }
    }
    synthesize(&c)
}

/// Fourier differentiation matrix for an even number of equispaced nodes:
/// `D_ij = ½ (−1)^{i−j} cot((θ_i − θ_j)/2)`, zero diagonal.
pub fn spectral_diff_matrix(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let sign = if (i + n - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            0.5 * sign / (0.5 * (i as f64 - j as f64) * h).tan()
        }
    })
}

/// Trigonometric interpolation of periodic samples onto `m` equispaced nodes.
pub fn resample(values: &[C64], m: usize) -> Vec<C64> {
    let n = values.len();
    if m == n {
        return values.to_vec();
    }
    let c = fourier_coefficients(values);
    let mut out = vec![C64::new(0.0, 0.0); m];
    let half = n.min(m) / 2;
    for (k, &ck) in c.iter().enumerate() {
        let kw = wavenumber(k, n);
        if kw.unsigned_abs() as usize > half {
            continue;
        }
        if kw.unsigned_abs() as usize == half && n.is_multiple_of(2) {
            // split the Nyquist mode symmetrically
            out[half] += 0.5 * ck;
            out[m - half] += 0.5 * ck;
            continue;
        }
        let slot = if kw >= 0 { kw as usize } else { (m as i64 + kw) as usize };
        out[slot] += ck;
    }
    synthesize(&out)
}

/// Fraction of the ℓ² energy of `values` carried by wavenumbers `|k| ≥ N/4`.
pub fn high_frequency_fraction(values: &[C64]) -> f64 {
    let n = values.len();
    let c = fourier_coefficients(values);
    let mut total = 0.0;
    let mut tail = 0.0;
    for (k, ck) in c.iter().enumerate() {
        let e = ck.norm_sqr();
        total += e;
        if wavenumber(k, n).unsigned_abs() as usize >= n / 4 {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (tail / total).sqrt()
    }
}

/// Principal value `PV ∫_S μ(τ)/(τ − t_i) dτ` at node `i` by singularity subtraction:
/// the regular part `(μ(τ) − μ(t_i))/(τ − t_i)` is integrated by the
/// trapezoidal rule with diagonal value `μ′(θ_i)`, and the subtracted term
/// contributes `μ(t_i)·πi`.
pub fn pv_cauchy_apply(curve: &SampledCurve, density: &[C64], i: usize) -> C64 {
    let n = curve.len();
    let w = curve.grid.weight();
    let ti = curve.points[i];
    let mu_i = density[i];
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        if j != i {
            acc += (density[j] - mu_i) * curve.d1[j] / (curve.points[j] - ti);
        }
    }
    let dmu = spectral_derivative(density);
    acc += dmu[i];
    acc * w + mu_i * C64::new(0.0, PI)
}

/// Matrix `S` with `(Sμ)_i = pv_cauchy_apply(curve, μ, i)` for every density.
pub fn pv_cauchy_matrix(curve: &SampledCurve) -> DMatrix<C64> {
    let n = curve.len();
    let w = curve.grid.weight();
    let d = spectral_diff_matrix(n);
    let mut s = DMatrix::from_fn(n, n, |i, j| C64::from(w * d[(i, j)]));
    for i in 0..n {
        let ti = curve.points[i];
        let mut row_sum = C64::new(0.0, 0.0);
        for j in 0..n {
            if j != i {
                let k = w * curve.d1[j] / (curve.points[j] - ti);
                s[(i, j)] += k;
                row_sum += k;
            }
        }
        s[(i, i)] += C64::new(0.0, PI) - row_sum;
    }
    s
}

/// Kernels for off-boundary contour integrals `∫_S μ(τ) k(τ, z) dτ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauchyKernel {
    /// `1/(τ − z)`
    Cauchy,
    /// `(τ + z)/(τ(τ − z))`
    Schwarz,
}

impl CauchyKernel {
    pub fn eval(self, tau: C64, z: C64) -> C64 {
        match self {
            CauchyKernel::Cauchy => 1.0 / (tau - z),
            CauchyKernel::Schwarz => (tau + z) / (tau * (tau - z)),
        }
    }

    /// `∂k/∂z`.
    pub fn eval_dz(self, tau: C64, z: C64) -> C64 {
        match self {
            CauchyKernel::Cauchy => 1.0 / ((tau - z) * (tau - z)),
            // (τ + z)/(τ(τ − z)) = −1/τ + 2/(τ − z)
            CauchyKernel::Schwarz => 2.0 / ((tau - z) * (tau - z)),
        }
    }
}

/// Minimum distance from S at which plain quadrature is trusted.
pub fn boundary_guard(curve: &SampledCurve) -> f64 {
    5.0 * curve.grid.weight() * curve.max_speed()
}

pub fn check_guard(curve: &SampledCurve, z: C64) -> Result<()> {
    let distance = curve.distance_to(z);
    let guard = boundary_guard(curve);
    if distance < guard {
        return Err(Error::TooCloseToBoundary {
            point: z,
            distance,
            guard,
        });
    }
    Ok(())
}

/// Trapezoidal approximation of `∫_S μ(τ) k(τ, z) dτ` for `z` off the curve.
pub fn cauchy_offboundary(curve: &SampledCurve, density: &[C64], z: C64, kernel: CauchyKernel) -> Result<C64> {
    check_guard(curve, z)?;
    Ok(contour_sum(curve, density, |tau| kernel.eval(tau, z)))
}

/// z-derivative of [`cauchy_offboundary`].
pub fn cauchy_offboundary_dz(curve: &SampledCurve, density: &[C64], z: C64, kernel: CauchyKernel) -> Result<C64> {
    check_guard(curve, z)?;
    Ok(contour_sum(curve, density, |tau| kernel.eval_dz(tau, z)))
}

fn contour_sum(curve: &SampledCurve, density: &[C64], k: impl Fn(C64) -> C64) -> C64 {
    let w = curve.grid.weight();
    curve
        .points
        .iter()
        .zip(&curve.d1)
        .zip(density)
        .map(|((&tau, &dtau), &mu)| mu * k(tau) * dtau)
        .sum::<C64>()
        * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curve;

    fn circle(n: usize) -> SampledCurve {
        Curve::unit_circle().sample(&PeriodicGrid::new(n).unwrap())
    }

    #[test]
    fn grid_validation() {
        assert!(PeriodicGrid::new(7).is_err());
        assert!(PeriodicGrid::new(6).is_err());
        let g = PeriodicGrid::new(8).unwrap();
        let nodes = g.nodes();
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(nodes[7] < 2.0 * PI);
    }

    #[test]
    fn trapezoid_examples() {
        let g = PeriodicGrid::new(64).unwrap();
        let s = BoundarySamples::from_real_fn(&g, |t| t.sin().powi(2));
        assert!((s.integrate(0) - C64::from(PI)).norm() < 1e-13);
        let e = BoundarySamples::from_fn(&g, |t| C64::from_polar(1.0, 3.0 * t));
        assert!(e.integrate(0).norm() < 1e-13);
        let one = BoundarySamples::from_real_fn(&g, |_| 1.0);
        assert_eq!(one.integrate(0), C64::from(2.0 * PI));
    }

    #[test]
    fn samples_length_checked() {
        let g = PeriodicGrid::new(8).unwrap();
        assert!(BoundarySamples::new(g, 2, vec![C64::from(0.0); 8]).is_err());
    }

    #[test]
    fn spectral_derivative_of_trig_poly() {
        let g = PeriodicGrid::new(32).unwrap();
        let v: Vec<C64> = g
            .nodes()
            .iter()
            .map(|&t| C64::from((3.0 * t).sin() + 0.5 * t.cos()))
            .collect();
        let d = spectral_derivative(&v);
        let dm = spectral_diff_matrix(32);
        for (i, &t) in g.nodes().iter().enumerate() {
            let exact = 3.0 * (3.0 * t).cos() - 0.5 * t.sin();
            assert!((d[i] - C64::from(exact)).norm() < 1e-12);
            let row: C64 = (0..32).map(|j| v[j] * dm[(i, j)]).sum();
            assert!((row - C64::from(exact)).norm() < 1e-12);
        }
    }

    #[test]
    fn resample_is_exact_for_band_limited() {
        let g = PeriodicGrid::new(16).unwrap();
        let f = |t: f64| C64::new((2.0 * t).cos(), (5.0 * t).sin());
        let v: Vec<C64> = g.nodes().into_iter().map(f).collect();
        let up = resample(&v, 64);
        let fine = PeriodicGrid::new(64).unwrap();
        for (i, t) in fine.nodes().into_iter().enumerate() {
            assert!((up[i] - f(t)).norm() < 1e-13);
        }
        let down = resample(&up, 16);
        for i in 0..16 {
            assert!((down[i] - v[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn pv_examples_on_circle() {
        let c = circle(128);
        let ones = vec![C64::from(1.0); 128];
        let zeros = vec![C64::from(0.0); 128];
        let tau: Vec<C64> = c.points.clone();
        for i in [0, 17, 64, 127] {
            assert!((pv_cauchy_apply(&c, &ones, i) - C64::new(0.0, PI)).norm() < 1e-10);
            assert!((pv_cauchy_apply(&c, &tau, i) - C64::new(0.0, PI) * c.points[i]).norm() < 1e-10);
            assert_eq!(pv_cauchy_apply(&c, &zeros, i), C64::from(0.0));
        }
    }

    #[test]
    fn pv_matrix_matches_pointwise_rule() {
        let c = Curve::ellipse(2.0, 1.0)
            .unwrap()
            .sample(&PeriodicGrid::new(32).unwrap());
        let mu: Vec<C64> = c.points.iter().map(|p| p * p + 1.0 / p).collect();
        let s = pv_cauchy_matrix(&c);
        for i in 0..32 {
            let row: C64 = (0..32).map(|j| s[(i, j)] * mu[j]).sum();
            assert!((row - pv_cauchy_apply(&c, &mu, i)).norm() < 1e-11);
        }
    }

    #[test]
    fn pv_of_analytic_densities_on_ellipse() {
        // interior-analytic: πi μ(t); exterior-analytic vanishing at ∞: −πi μ(t)
        let c = Curve::ellipse(2.0, 1.0)
            .unwrap()
            .sample(&PeriodicGrid::new(128).unwrap());
        let cube: Vec<C64> = c.points.iter().map(|p| p * p * p).collect();
        let inv: Vec<C64> = c.points.iter().map(|p| 1.0 / p).collect();
        for i in (0..128).step_by(9) {
            let t = c.points[i];
            assert!((pv_cauchy_apply(&c, &cube, i) - C64::new(0.0, PI) * t * t * t).norm() < 1e-9);
            assert!((pv_cauchy_apply(&c, &inv, i) + C64::new(0.0, PI) / t).norm() < 1e-9);
        }
    }

    #[test]
    fn pv_converges_spectrally() {
        let err = |n: usize| {
            let c = circle(n);
            let z0 = C64::new(0.7, 0.1);
            let mu: Vec<C64> = c.points.iter().map(|p| 1.0 / (p - z0)).collect();
            (0..n)
                .map(|i| (pv_cauchy_apply(&c, &mu, i) + C64::new(0.0, PI) * mu[i]).norm())
                .fold(0.0, f64::max)
        };
        let (e16, e32, e64) = (err(16), err(32), err(64));
        assert!(e32 <= e16 / 4.0, "{e16} {e32}");
        assert!(e64 <= e32 / 4.0 || e64 < 1e-12, "{e32} {e64}");
    }

    #[test]
    fn offboundary_examples() {
        let c = circle(64);
        let ones = vec![C64::from(1.0); 64];
        let v = cauchy_offboundary(&c, &ones, C64::from(0.0), CauchyKernel::Cauchy).unwrap();
        assert!((v - C64::new(0.0, 2.0 * PI)).norm() < 1e-13);
        let v = cauchy_offboundary(&c, &ones, C64::from(3.0), CauchyKernel::Cauchy).unwrap();
        assert!(v.norm() < 1e-13);
        let cos: Vec<C64> = c.points.iter().map(|p| C64::from(p.re)).collect();
        let z = C64::from(2.0);
        let v = cauchy_offboundary(&c, &cos, z, CauchyKernel::Schwarz).unwrap();
        assert!((v - C64::new(0.0, -4.0 * PI) / (2.0 * z)).norm() < 1e-12);
        assert!(matches!(
            cauchy_offboundary(&c, &ones, C64::from(1.01), CauchyKernel::Cauchy),
            Err(Error::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn offboundary_derivative_matches_difference() {
        let c = circle(64);
        let mu: Vec<C64> = c.points.iter().map(|p| C64::from(p.re * p.im + 0.3)).collect();
        let z = C64::new(1.8, -0.9);
        let h = 1e-5;
        for k in [CauchyKernel::Cauchy, CauchyKernel::Schwarz] {
            let d = cauchy_offboundary_dz(&c, &mu, z, k).unwrap();
            let fd = (cauchy_offboundary(&c, &mu, z + h, k).unwrap() - cauchy_offboundary(&c, &mu, z - h, k).unwrap())
                / (2.0 * h);
            assert!((d - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn high_frequency_detection() {
        let nyq: Vec<C64> = (0..64)
            .map(|i| C64::from(if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        assert!(high_frequency_fraction(&nyq) > 0.99);
        let smooth: Vec<C64> = PeriodicGrid::new(64)
            .unwrap()
            .nodes()
            .iter()
            .map(|t| C64::from(t.cos()))
            .collect();
        assert!(high_frequency_fraction(&smooth) < 1e-12);
    }
}
