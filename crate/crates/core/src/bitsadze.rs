//! The Bitsadze system `∂²w/∂z̄² = 0` in the exterior of the unit disk.
//!
//! Every solution has the form `w = z̄φ(z) + ψ(z)` with `φ`, `ψ` analytic
//! in `|z| > 1`. This module builds the two infinite null families that make
//! the Dirichlet and Neumann problems non-Noetherian, and the explicit
//! solutions of the two solvable boundary problems, so they can be used as
//! exact fixtures.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::geometry::{Curve, SampledCurve};
use crate::quadrature::{
    cauchy_offboundary, cauchy_offboundary_dz, fourier_coefficients, BoundarySamples, CauchyKernel, PeriodicGrid,
};
use crate::{Error, Result, SolvabilityCondition, C64};

/// Radius of the circle on which Laurent coefficients are sampled.
pub const LAURENT_RADIUS: f64 = 2.0;
/// Coefficients below this fraction of the largest one end the series.
const LAURENT_CUTOFF: f64 = 1e-14;
/// Absolute tolerance on the zero-mean conditions.
pub const MOMENT_TOL: f64 = 1e-10;
/// A logarithmic coefficient below this is treated as absent.
pub const LOG_TOL: f64 = 1e-8;
/// Boundary residual accepted for the special Neumann certificate.
pub const CERTIFICATE_TOL: f64 = 1e-8;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `Σ_{m≥0} c_m z^{−m} + λ ln z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    pub coeffs: Vec<C64>,
    pub log: C64,
}

impl LaurentSeries {
    pub fn new(coeffs: Vec<C64>) -> Self {
        LaurentSeries {
            coeffs,
            log: C64::new(0.0, 0.0),
        }
    }

    /// Single term `a·z^{−m}`.
    pub fn monomial(m: usize, a: C64) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); m + 1];
        coeffs[m] = a;
        Self::new(coeffs)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let inv = 1.0 / z;
        let mut acc = C64::new(0.0, 0.0);
        for a in self.coeffs.iter().rev() {
            acc = acc * inv + a;
        }
        if self.log != C64::new(0.0, 0.0) {
            acc += self.log * z.ln();
        }
        acc
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let inv = 1.0 / z;
        let mut acc = C64::new(0.0, 0.0);
        for (m, a) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * inv - a * m as f64;
        }
        // acc holds Σ −m c_m z^{−(m−1)}; one more factor gives z^{−(m+1)}
        acc * inv * inv + self.log * inv
    }

    /// Antiderivative vanishing at infinity. A `z^{−1}` term becomes a logarithm.
    pub fn antiderivative(&self) -> LaurentSeries {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.coeffs.len().saturating_sub(1).max(1)];
        for (m, a) in self.coeffs.iter().enumerate().skip(2) {
            coeffs[m - 1] = -a / (m - 1) as f64;
        }
        LaurentSeries {
            coeffs,
            log: self.coeffs.get(1).copied().unwrap_or_default(),
        }
    }

    /// Samples `f` on `|z| = ρ` at `m` points and reads off its Laurent
    /// coefficients; the series is cut at the last coefficient that is
    /// not negligible.
    pub fn from_samples(f: impl Fn(C64) -> Result<C64>, radius: f64, m: usize) -> Result<Self> {
        let samples = (0..m)
            .map(|k| f(C64::from_polar(radius, 2.0 * PI * k as f64 / m as f64)))
            .collect::<Result<Vec<_>>>()?;
        // fourier_coefficients returns c_k for e^{ikθ}; z^{−j} carries e^{−ijθ}
        let fc = fourier_coefficients(&samples);
        let scaled: Vec<C64> = (0..=m / 2).map(|j| fc[(m - j) % m]).collect();
        let top = scaled.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let last = scaled
            .iter()
            .rposition(|v| v.norm() > LAURENT_CUTOFF * top)
            .unwrap_or(0);
        let coeffs = scaled[..=last]
            .iter()
            .enumerate()
            .map(|(j, v)| v * radius.powi(j as i32))
            .collect();
        Ok(Self::new(coeffs))
    }
}

/// A function analytic in the exterior of the unit disk.
#[derive(Debug, Clone)]
pub enum ExteriorAnalyticFunction {
    Laurent(LaurentSeries),
    /// `scale·∫_S μ(τ) k(τ, z) dτ + constant`.
    BoundaryIntegral {
        curve: SampledCurve,
        density: Vec<C64>,
        kernel: CauchyKernel,
        scale: C64,
        constant: C64,
    },
}

impl ExteriorAnalyticFunction {
    pub fn zero() -> Self {
        Self::Laurent(LaurentSeries::new(vec![C64::new(0.0, 0.0)]))
    }

    pub fn constant(a: C64) -> Self {
        Self::Laurent(LaurentSeries::new(vec![a]))
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        match self {
            Self::Laurent(s) => Ok(s.eval(z)),
            Self::BoundaryIntegral {
                curve,
                density,
                kernel,
                scale,
                constant,
            } => Ok(scale * cauchy_offboundary(curve, density, z, *kernel)? + constant),
        }
    }

    pub fn derivative(&self, z: C64) -> Result<C64> {
        match self {
            Self::Laurent(s) => Ok(s.derivative(z)),
            Self::BoundaryIntegral {
                curve,
                density,
                kernel,
                scale,
                ..
            } => Ok(scale * cauchy_offboundary_dz(curve, density, z, *kernel)?),
        }
    }

    /// Laurent form; boundary integrals are sampled on `|z| = 2`.
    pub fn to_laurent(&self, samples: usize) -> Result<LaurentSeries> {
        match self {
            Self::Laurent(s) => Ok(s.clone()),
            Self::BoundaryIntegral { .. } => LaurentSeries::from_samples(|z| self.eval(z), LAURENT_RADIUS, samples),
        }
    }

    pub fn log_coefficient(&self) -> C64 {
        match self {
            Self::Laurent(s) => s.log,
            Self::BoundaryIntegral { .. } => C64::new(0.0, 0.0),
        }
    }
}

/// Outcome of checking a constructed solution against its boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum FixtureStatus {
    Certified { residual: f64 },
    Discrepancy { residual: f64 },
}

/// `w = z̄φ(z) + ψ(z) = u₁ + i u₂`.
#[derive(Debug, Clone)]
pub struct BitsadzeSolution {
    pub phi: ExteriorAnalyticFunction,
    pub psi: ExteriorAnalyticFunction,
    pub fixture_status: Option<FixtureStatus>,
}

/// First derivatives of `u₁`, `u₂` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradient {
    pub u1_x: f64,
    pub u1_y: f64,
    pub u2_x: f64,
    pub u2_y: f64,
}

impl BitsadzeSolution {
    pub fn new(phi: ExteriorAnalyticFunction, psi: ExteriorAnalyticFunction) -> Self {
        BitsadzeSolution {
            phi,
            psi,
            fixture_status: None,
        }
    }

    pub fn laurent(phi: LaurentSeries, psi: LaurentSeries) -> Self {
        Self::new(
            ExteriorAnalyticFunction::Laurent(phi),
            ExteriorAnalyticFunction::Laurent(psi),
        )
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        Ok(z.conj() * self.phi.eval(z)? + self.psi.eval(z)?)
    }

    /// `(∂w/∂z, ∂w/∂z̄) = (z̄φ′ + ψ′, φ)`.
    pub fn wirtinger(&self, z: C64) -> Result<(C64, C64)> {
        let wz = z.conj() * self.phi.derivative(z)? + self.psi.derivative(z)?;
        Ok((wz, self.phi.eval(z)?))
    }

    pub fn gradient(&self, z: C64) -> Result<Gradient> {
        let (wz, wzb) = self.wirtinger(z)?;
        let wx = wz + wzb;
        let wy = C64::i() * (wz - wzb);
        Ok(Gradient {
            u1_x: wx.re,
            u1_y: wy.re,
            u2_x: wx.im,
            u2_y: wy.im,
        })
    }

    /// `ψ` has no logarithmic term, so `w` is single-valued in the exterior.
    pub fn single_valued(&self) -> bool {
        self.psi.log_coefficient().norm() <= LOG_TOL && self.phi.log_coefficient().norm() <= LOG_TOL
    }

    /// Adds a constant to `ψ`, the free parameter of the solvable problems.
    pub fn with_constant(mut self, k: C64) -> Self {
        self.psi = match self.psi {
            ExteriorAnalyticFunction::Laurent(mut s) => {
                if s.coeffs.is_empty() {
                    s.coeffs.push(C64::new(0.0, 0.0));
                }
                s.coeffs[0] += k;
                ExteriorAnalyticFunction::Laurent(s)
            }
            ExteriorAnalyticFunction::BoundaryIntegral {
                curve,
                density,
                kernel,
                scale,
                constant,
            } => ExteriorAnalyticFunction::BoundaryIntegral {
                curve,
                density,
                kernel,
                scale,
                constant: constant + k,
            },
        };
        self
    }
}

/// Boundary matrices `P`, `Q`, `R` of a preset at one boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryMatrices {
    pub p: Matrix2<f64>,
    pub q: Matrix2<f64>,
    pub r: Matrix2<f64>,
}

/// The four boundary problems for the Bitsadze system on `|t| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMatrixPreset {
    Dirichlet,
    Neumann,
    SpecialNeumann,
    Problem6,
}

impl BoundaryMatrixPreset {
    pub const ALL: [BoundaryMatrixPreset; 4] = [Self::Dirichlet, Self::Neumann, Self::SpecialNeumann, Self::Problem6];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
            Self::SpecialNeumann => "special_neumann",
            Self::Problem6 => "problem6",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Matrices at `t = e^{iθ}`; the Neumann preset uses the normal `(cos θ, sin θ)`.
    pub fn matrices(self, theta: f64) -> BoundaryMatrices {
        let zero = Matrix2::zeros();
        let id = Matrix2::identity();
        match self {
            Self::Dirichlet => BoundaryMatrices {
                p: zero,
                q: zero,
                r: id,
            },
            Self::Neumann => BoundaryMatrices {
                p: id * theta.cos(),
                q: id * theta.sin(),
                r: zero,
            },
            Self::SpecialNeumann => BoundaryMatrices {
                p: Matrix2::new(0.0, 0.0, 1.0, 0.0),
                q: Matrix2::new(0.0, 0.0, 0.0, -1.0),
                r: Matrix2::new(1.0, 0.0, 0.0, 0.0),
            },
            Self::Problem6 => BoundaryMatrices {
                p: id,
                q: Matrix2::new(0.0, -1.0, -1.0, 0.0),
                r: zero,
            },
        }
    }

    pub fn det_p_plus_iq(self, theta: f64) -> C64 {
        let m = self.matrices(theta);
        det_p_plus_iq(&m.p, &m.q)
    }
}

pub fn det_p_plus_iq(p: &Matrix2<f64>, q: &Matrix2<f64>) -> C64 {
    let m = p.map(c) + q.map(|v| C64::new(0.0, v));
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// `ω_k = z̄ z^{−k} − z^{−(k+1)}`, which vanishes on `|t| = 1`.
pub fn dirichlet_null_element(k: i64) -> Result<BitsadzeSolution> {
    if k < 1 {
        return Err(Error::InvalidOrder(k));
    }
    let k = k as usize;
    Ok(BitsadzeSolution::laurent(
        LaurentSeries::monomial(k, c(1.0)),
        LaurentSeries::monomial(k + 1, c(-1.0)),
    ))
}

/// `ω_0 = 1`, `ω_k = z̄ z^{−k} − (k−1)/(k+1)·z^{−(k+1)}`, with zero normal derivative on `|t| = 1`.
pub fn neumann_null_element(k: i64) -> Result<BitsadzeSolution> {
    if k < 0 {
        return Err(Error::InvalidOrder(k));
    }
    if k == 0 {
        return Ok(BitsadzeSolution::laurent(
            LaurentSeries::new(vec![]),
            LaurentSeries::new(vec![c(1.0)]),
        ));
    }
    let a = (k - 1) as f64 / (k + 1) as f64;
    let k = k as usize;
    Ok(BitsadzeSolution::laurent(
        LaurentSeries::monomial(k, c(1.0)),
        LaurentSeries::monomial(k + 1, c(-a)),
    ))
}

fn check_moment(f: &BoundarySamples, condition: SolvabilityCondition) -> Result<()> {
    let moment = f.integrate(0).re;
    let scale = f.values().iter().map(|v| v.norm()).fold(1.0, f64::max);
    if moment.abs() > MOMENT_TOL * scale {
        return Err(Error::SolvabilityViolated { condition, moment });
    }
    Ok(())
}

fn scalar_data(f: &BoundarySamples) -> Result<Vec<C64>> {
    if f.components() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected scalar boundary data, got {} components",
            f.components()
        )));
    }
    Ok(f.values().iter().map(|v| c(v.re)).collect())
}

fn circle_samples(grid: &PeriodicGrid) -> SampledCurve {
    Curve::unit_circle().sample(grid)
}

/// `−(1/4πi)∫_S (t + z)/(t(t − z)) f(t) dt`, the exterior Schwarz integral.
fn schwarz(curve: &SampledCurve, f: Vec<C64>) -> ExteriorAnalyticFunction {
    ExteriorAnalyticFunction::BoundaryIntegral {
        curve: curve.clone(),
        density: f,
        kernel: CauchyKernel::Schwarz,
        scale: -1.0 / C64::new(0.0, 4.0 * PI),
        constant: C64::new(0.0, 0.0),
    }
}

fn same_grid(f1: &BoundarySamples, f2: &BoundarySamples) -> Result<()> {
    if f1.grid() != f2.grid() {
        return Err(Error::DimensionMismatch("f1 and f2 must share a grid".into()));
    }
    Ok(())
}

/// Special Neumann problem: `u₁ = f₁`, `∂u₁/∂x − ∂u₂/∂y = f₂` on `|t| = 1`.
///
/// ```text
/// ω(z) = −z̄/(4πi)∫(t+z)/(t(t−z)) f₂ dt + 1/(4πi)∫(t+z)/(zt(t−z)) f₂ dt
///        − 1/(πi)∫ f₁/(t−z) dt + 1/(2πi)∫ f₁/t dt + iK
/// ```
///
/// The returned solution carries a [`FixtureStatus`] from re-checking both
/// boundary conditions at the data nodes.
pub fn solve_special_neumann(f1: &BoundarySamples, f2: &BoundarySamples, k: f64) -> Result<BitsadzeSolution> {
    same_grid(f1, f2)?;
    check_moment(f2, SolvabilityCondition::ZeroMeanF2)?;
    let g1 = scalar_data(f1)?;
    let g2 = scalar_data(f2)?;
    let grid = f1.grid().clone();
    let curve = circle_samples(&grid);
    let phi = schwarz(&curve, g2.clone());
    let phi_l = phi.to_laurent(grid.len())?;

    let moment1 = {
        // (1/2πi)∫ f₁/t dt = (1/2π)∫ f₁ dθ
        let w = grid.weight();
        g1.iter().map(|v| v * w).sum::<C64>() / (2.0 * PI)
    };
    let psi = |z: C64| -> Result<C64> {
        let a = phi.eval(z)? / z;
        let b = cauchy_offboundary(&curve, &g1, z, CauchyKernel::Cauchy)? / C64::new(0.0, PI);
        Ok(-a - b + moment1)
    };
    let psi_l = LaurentSeries::from_samples(psi, LAURENT_RADIUS, grid.len())?;
    let mut sol = BitsadzeSolution::laurent(phi_l, psi_l).with_constant(C64::new(0.0, k));

    let mut f = f1.values().to_vec();
    f.extend_from_slice(f2.values());
    let data = BoundarySamples::new(grid.clone(), 2, f)?;
    let res = boundary_residual(&sol, BoundaryMatrixPreset::SpecialNeumann, Some(&data), &grid)?;
    let residual = res[0].max(res[1]);
    let scale = data.values().iter().map(|v| v.norm()).fold(1.0, f64::max);
    sol.fixture_status = Some(if residual <= CERTIFICATE_TOL * scale {
        FixtureStatus::Certified { residual }
    } else {
        FixtureStatus::Discrepancy { residual }
    });
    Ok(sol)
}

/// Problem with `P = I`, `Q = [[0,−1],[−1,0]]`, `R = 0`:
/// `2Re φ = f₁` and `2Im[t̄φ′ + ψ′] = f₂` on `|t| = 1`.
///
/// `φ` is the Schwarz integral of `f₁`, and
/// `ψ′(z) = −φ′(z)/z − (1/4π)∫(t+z)/(t(t−z)) f₂ dt`. `ψ` is obtained by
/// integrating the Laurent series of `ψ′` with `ψ(∞) = 0`. When `f₂` has a
/// first Fourier mode, `ψ′` has a `1/z` term and `ψ` a logarithm; the
/// logarithm is kept and [`BitsadzeSolution::single_valued`] reports it.
pub fn solve_problem6(f1: &BoundarySamples, f2: &BoundarySamples) -> Result<BitsadzeSolution> {
    same_grid(f1, f2)?;
    check_moment(f1, SolvabilityCondition::ZeroMeanF1)?;
    check_moment(f2, SolvabilityCondition::ZeroMeanF2)?;
    let g1 = scalar_data(f1)?;
    let g2 = scalar_data(f2)?;
    let grid = f1.grid().clone();
    let curve = circle_samples(&grid);
    let phi = schwarz(&curve, g1);
    let phi_l = phi.to_laurent(grid.len())?;
    let psi_prime = |z: C64| -> Result<C64> {
        let s = cauchy_offboundary(&curve, &g2, z, CauchyKernel::Schwarz)?;
        Ok(-phi.derivative(z)? / z - s / (4.0 * PI))
    };
    let dpsi = LaurentSeries::from_samples(psi_prime, LAURENT_RADIUS, grid.len())?;
    let psi_l = dpsi.antiderivative();
    Ok(BitsadzeSolution::laurent(phi_l, psi_l))
}

/// Max norms of `P u_x + Q u_y + R u − f` over the nodes of `grid` on `|t| = 1`.
pub fn boundary_residual(
    sol: &BitsadzeSolution,
    preset: BoundaryMatrixPreset,
    f: Option<&BoundarySamples>,
    grid: &PeriodicGrid,
) -> Result<[f64; 2]> {
    boundary_residual_with(sol, |theta| preset.matrices(theta), f, grid)
}

pub fn boundary_residual_with(
    sol: &BitsadzeSolution,
    matrices: impl Fn(f64) -> BoundaryMatrices,
    f: Option<&BoundarySamples>,
    grid: &PeriodicGrid,
) -> Result<[f64; 2]> {
    if let Some(f) = f {
        if f.components() != 2 || f.grid().len() != grid.len() {
            return Err(Error::DimensionMismatch(
                "boundary data must have two components on the grid".into(),
            ));
        }
    }
    let mut out = [0.0_f64; 2];
    for (i, theta) in grid.nodes().into_iter().enumerate() {
        let t = C64::from_polar(1.0, theta);
        let m = matrices(theta);
        let g = sol.gradient(t)?;
        let w = sol.eval(t)?;
        let ux = nalgebra::Vector2::new(g.u1_x, g.u2_x);
        let uy = nalgebra::Vector2::new(g.u1_y, g.u2_y);
        let u = nalgebra::Vector2::new(w.re, w.im);
        let mut r = m.p * ux + m.q * uy + m.r * u;
        if let Some(f) = f {
            r[0] -= f.component(0)[i].re;
            r[1] -= f.component(1)[i].re;
        }
        out[0] = out[0].max(r[0].abs());
        out[1] = out[1].max(r[1].abs());
    }
    Ok(out)
}
