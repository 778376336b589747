//! Exterior Poincaré problem for decomposable systems
//!
//! ```text
//! a_j ∂²u_j/∂x² + 2b_j ∂²u_j/∂x∂y + c_j ∂²u_j/∂y² = 0,   j = 1..n,   in D⁻
//! Σ_j P_kj(t) ∂u_j/∂x + Q_kj(t) ∂u_j/∂y = f_k(t),          t ∈ S
//! ```
//!
//! Each `u_j = Re φ_j(z_j)` with `z_j` the characteristic variable of
//! component `j`, and `φ_j` a logarithmic potential of a real density,
//! `φ_j(z_j) = ∫_S ln(τ_j − z_j) μ_j(s) ds` with `τ_j` the image of the
//! boundary point. Bounded solutions need `∫_S μ_j ds = 0`; that constraint is
//! appended to the singular integral system as one extra row per component.
//!
//! The potential is normalized so that `φ_j(∞) = 0`. Derivative-only
//! boundary conditions do not see additive constants, so this fixes the
//! field uniquely when the boundary problem has no other kernel.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::geometry::{CharacteristicMap, Curve, EllipticCoefficients, FourierTable, SampledCurve};
use crate::quadrature::{check_guard, resample, BoundarySamples, PeriodicGrid};
use crate::sie::{
    discretize, index, nullspaces, solve, symbol_check, BlockLayout, NoetherDiagnostics, SingularSystem, SolveStatus,
    RANK_TOL,
};
use crate::{Error, Result, C64};

/// Moments `|∫ μ_j ds|` above this fraction of `∫ |μ_j| ds` are rejected.
pub const MOMENT_TOL: f64 = 1e-8;

/// Real function of the curve parameter θ.
#[derive(Clone)]
pub enum ScalarFn {
    Table(FourierTable),
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ScalarFn {
    pub fn constant(c: f64) -> Self {
        ScalarFn::Table(FourierTable::constant(c))
    }

    pub fn func(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn::Func(Arc::new(f))
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            ScalarFn::Table(t) => t.eval(theta),
            ScalarFn::Func(f) => f(theta),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            ScalarFn::Table(t) => t.is_zero(),
            ScalarFn::Func(f) => (0..64).all(|i| f(2.0 * PI * i as f64 / 64.0) == 0.0),
        }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Table(t) => t.fmt(f),
            ScalarFn::Func(_) => f.write_str("ScalarFn::Func(..)"),
        }
    }
}

impl From<FourierTable> for ScalarFn {
    fn from(t: FourierTable) -> Self {
        ScalarFn::Table(t)
    }
}

/// `n×n` matrix of functions of θ, row-major.
#[derive(Debug, Clone)]
pub struct MatrixFn {
    n: usize,
    entries: Vec<ScalarFn>,
}

impl MatrixFn {
    pub fn new(n: usize, entries: Vec<ScalarFn>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        Ok(MatrixFn { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        MatrixFn {
            n,
            entries: vec![ScalarFn::constant(0.0); n * n],
        }
    }

    pub fn diagonal(diag: Vec<ScalarFn>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (j, d) in diag.into_iter().enumerate() {
            m.entries[j * n + j] = d;
        }
        m
    }

    pub fn from_tables(n: usize, tables: Vec<FourierTable>) -> Result<Self> {
        Self::new(n, tables.into_iter().map(ScalarFn::Table).collect())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> &ScalarFn {
        &self.entries[r * self.n + c]
    }

    pub fn eval(&self, theta: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |r, c| self.entry(r, c).eval(theta))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ScalarFn::is_zero)
    }
}

#[derive(Debug, Clone)]
pub struct PoincareProblem {
    pub curve: Curve,
    pub coeffs: EllipticCoefficients,
    pub p: MatrixFn,
    pub q: MatrixFn,
    pub f: Vec<ScalarFn>,
}

impl PoincareProblem {
    pub fn new(curve: Curve, coeffs: EllipticCoefficients, p: MatrixFn, q: MatrixFn, f: Vec<ScalarFn>) -> Result<Self> {
        Self::with_r(curve, coeffs, p, q, None, f)
    }

    /// Accepts an `R` matrix for completeness; only `R ≡ 0` is supported.
    pub fn with_r(
        curve: Curve,
        coeffs: EllipticCoefficients,
        p: MatrixFn,
        q: MatrixFn,
        r: Option<MatrixFn>,
        f: Vec<ScalarFn>,
    ) -> Result<Self> {
        let n = coeffs.len();
        if p.size() != n || q.size() != n || f.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} components but P is {0}x{0}, Q is {1}x{1} and f has {2} entries",
                p.size(),
                q.size(),
                f.len()
            )));
        }
        if let Some(r) = r {
            if r.size() != n {
                return Err(Error::DimensionMismatch(format!(
                    "R is {0}x{0}, expected {n}x{n}",
                    r.size()
                )));
            }
            if !r.is_zero() {
                return Err(Error::UnsupportedRTerm);
            }
        }
        Ok(PoincareProblem { curve, coeffs, p, q, f })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// Replaces the right-hand side.
    pub fn with_rhs(mut self, f: Vec<ScalarFn>) -> Result<Self> {
        if f.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "f has {} entries, expected {}",
                f.len(),
                self.n()
            )));
        }
        self.f = f;
        Ok(self)
    }

    /// `c_kj(θ) = P_kj(θ)·∂z_j/∂x + Q_kj(θ)·∂z_j/∂y`, so that row `k` of the
    /// boundary condition reads `Σ_j Re[c_kj φ′_j(t_j)] = f_k`.
    pub fn boundary_factors(&self, theta: f64) -> DMatrix<C64> {
        let p = self.p.eval(theta);
        let q = self.q.eval(theta);
        let maps = self.coeffs.maps();
        DMatrix::from_fn(self.n(), self.n(), |k, j| {
            p[(k, j)] * maps[j].dz_dx() + q[(k, j)] * maps[j].dz_dy()
        })
    }
}

/// Builds the real singular integral system for the densities `μ_j`.
///
/// With `v = c_kj |t′| / L_j(t′)` (`L_j` the linear part of the
/// characteristic map) the symbol is `α = −π Im v`, `β = Re v`, and the
/// compact kernel is what remains of the exact kernel after removing
/// `β/(τ − t)`. Its diagonal is the analytic limit.
pub fn assemble(problem: &PoincareProblem, nodes: usize) -> Result<SingularSystem> {
    let grid = PeriodicGrid::new(nodes)?;
    let curve = problem.curve.sample(&grid);
    let n = problem.n();
    let maps = problem.coeffs.maps();
    let images: Vec<SampledCurve> = maps.iter().map(|m| curve.mapped(m)).collect();
    let thetas = grid.nodes();
    let factors: Vec<DMatrix<C64>> = thetas.iter().map(|&t| problem.boundary_factors(t)).collect();
    let speed: Vec<f64> = (0..nodes).map(|i| curve.speed(i)).collect();

    let mut alpha = vec![DMatrix::<C64>::zeros(n, n); nodes];
    let mut beta = vec![DMatrix::<C64>::zeros(n, n); nodes];
    for i in 0..nodes {
        for k in 0..n {
            for j in 0..n {
                let v = factors[i][(k, j)] * speed[i] / images[j].d1[i];
                alpha[i][(k, j)] = C64::from(-PI * v.im);
                beta[i][(k, j)] = C64::from(v.re);
            }
        }
    }

    let mut kernel = DMatrix::<C64>::zeros(n * nodes, n * nodes);
    for k in 0..n {
        for j in 0..n {
            let img = &images[j];
            for i in 0..nodes {
                let c = factors[i][(k, j)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let b = beta[i][(k, j)].re;
                let t = curve.points[i];
                let row = k * nodes + i;
                for l in 0..nodes {
                    let col = j * nodes + l;
                    kernel[(row, col)] = if l == i {
                        let d1 = curve.d1[i];
                        let g0 = speed[i];
                        let g1 = (d1.conj() * curve.d2[i]).re / g0;
                        let lt1 = img.d1[i];
                        let lt2 = img.d2[i];
                        let rho = (c / lt1 * (g1 - g0 * lt2 / (2.0 * lt1))).re;
                        b * curve.d2[i] / (2.0 * d1 * d1) - rho / d1
                    } else {
                        let exact = -(c * speed[l] / (img.points[l] - img.points[i])).re / curve.d1[l];
                        exact + b / (curve.points[l] - t)
                    };
                }
            }
        }
    }

    let rhs: Vec<C64> = (0..n)
        .flat_map(|k| thetas.iter().map(move |&t| C64::from(problem.f[k].eval(t))))
        .collect();
    Ok(SingularSystem::new(curve, n, alpha, beta, Some(kernel), rhs)?.with_real_values(true))
}

/// Evaluates the field `u_j(x, y) = Re φ_j(z_j)` from boundary densities.
#[derive(Debug, Clone)]
pub struct VekuaField {
    maps: Vec<CharacteristicMap>,
    images: Vec<SampledCurve>,
    /// `w·|t′(θ_l)|·μ_j(θ_l)`, component-major.
    charges: Vec<f64>,
    nodes: usize,
}

impl VekuaField {
    /// Checks the zero-moment condition and prepares the quadrature.
    pub fn new(curve: &Curve, coeffs: &EllipticCoefficients, density: &BoundarySamples) -> Result<Self> {
        let grid = density.grid().clone();
        let nodes = grid.len();
        let n = coeffs.len();
        if density.components() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} density components for {n} equations",
                density.components()
            )));
        }
        let sampled = curve.sample(&grid);
        let w = grid.weight();
        let mut charges = Vec::with_capacity(n * nodes);
        for j in 0..n {
            let mu = density.component(j);
            let mut moment = 0.0;
            let mut total = 0.0;
            for l in 0..nodes {
                let q = w * sampled.speed(l) * mu[l].re;
                moment += q;
                total += q.abs();
                charges.push(q);
            }
            if moment.abs() > MOMENT_TOL * total.max(f64::MIN_POSITIVE) && total > 0.0 {
                return Err(Error::MomentViolation { component: j, moment });
            }
        }
        let maps = coeffs.maps();
        let images = maps.iter().map(|m| sampled.mapped(m)).collect();
        Ok(VekuaField {
            maps,
            images,
            charges,
            nodes,
        })
    }

    pub fn components(&self) -> usize {
        self.maps.len()
    }

    fn charges(&self, j: usize) -> &[f64] {
        &self.charges[j * self.nodes..(j + 1) * self.nodes]
    }

    fn to_plane(&self, j: usize, x: f64, y: f64) -> Result<C64> {
        let zj = self.maps[j].forward(x, y);
        check_guard(&self.images[j], zj)?;
        Ok(zj)
    }

    /// `φ_j(z_j) = ∫ ln(τ_j − z_j) μ_j ds` with the branch of the logarithm
    /// continued along the curve; the zero moment makes it independent of
    /// the starting branch.
    pub fn phi(&self, j: usize, x: f64, y: f64) -> Result<C64> {
        let zj = self.to_plane(j, x, y)?;
        let img = &self.images[j];
        let mut re = 0.0;
        let mut im = 0.0;
        let mut prev = (img.points[0] - zj).arg();
        for (l, q) in self.charges(j).iter().enumerate() {
            let d = img.points[l] - zj;
            let mut a = d.arg();
            while a - prev > PI {
                a -= 2.0 * PI;
            }
            while a - prev < -PI {
                a += 2.0 * PI;
            }
            prev = a;
            re += q * d.norm().ln();
            im += q * a;
        }
        Ok(C64::new(re, im))
    }

    /// `φ′_j(z_j) = −∫ μ_j ds / (τ_j − z_j)`.
    pub fn phi_prime(&self, j: usize, x: f64, y: f64) -> Result<C64> {
        let zj = self.to_plane(j, x, y)?;
        let img = &self.images[j];
        Ok(-self
            .charges(j)
            .iter()
            .zip(&img.points)
            .map(|(q, tau)| *q / (tau - zj))
            .sum::<C64>())
    }

    pub fn u(&self, x: f64, y: f64) -> Result<Vec<f64>> {
        (0..self.components())
            .map(|j| {
                let zj = self.to_plane(j, x, y)?;
                Ok(self
                    .charges(j)
                    .iter()
                    .zip(&self.images[j].points)
                    .map(|(q, tau)| q * (tau - zj).norm().ln())
                    .sum())
            })
            .collect()
    }

    /// `(∂u_j/∂x, ∂u_j/∂y) = (Re φ′_j ∂z_j/∂x, Re φ′_j ∂z_j/∂y)`.
    pub fn gradient(&self, x: f64, y: f64) -> Result<Vec<(f64, f64)>> {
        (0..self.components())
            .map(|j| {
                let d = self.phi_prime(j, x, y)?;
                Ok(((d * self.maps[j].dz_dx()).re, (d * self.maps[j].dz_dy()).re))
            })
            .collect()
    }
}

/// `u_j(x, y)` for every component from densities `μ`.
pub fn vekua_reconstruct(problem: &PoincareProblem, mu: &BoundarySamples, x: f64, y: f64) -> Result<Vec<f64>> {
    VekuaField::new(&problem.curve, &problem.coeffs, mu)?.u(x, y)
}

/// Densities, field evaluator and Noether data of a solved problem.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub density: BoundarySamples,
    pub field: VekuaField,
    pub diagnostics: NoetherDiagnostics,
    /// Resolved kernel of the bordered system; any combination may be added to the density.
    pub kernel_basis: Vec<BoundarySamples>,
    /// `max |Bμ − f|` of the bordered least-squares solve.
    pub lsq_residual: f64,
    /// Boundary condition residual with the density interpolated to twice as many nodes.
    pub fine_grid_residual: f64,
    /// `10·tol·max(1, ‖f‖)`, the bound for `fine_grid_residual`.
    pub fine_grid_tolerance: f64,
}

impl FieldSolution {
    /// The boundary condition also holds on the twice-finer grid; fails when
    /// the density is under-resolved at the solve resolution.
    pub fn equivalence_certified(&self) -> bool {
        self.fine_grid_residual <= self.fine_grid_tolerance
    }

    pub fn u(&self, x: f64, y: f64) -> Result<Vec<f64>> {
        self.field.u(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> Result<Vec<(f64, f64)>> {
        self.field.gradient(x, y)
    }
}

/// Bordered operator `[A; m]`, where row `m_j` integrates component `j` against `ds`.
/// `[A; moment rows]`: one row `w|t′(θ_l)|` per component below the Nyström matrix.
pub fn bordered(a: &DMatrix<C64>, sys: &SingularSystem) -> DMatrix<C64> {
    let nodes = sys.nodes();
    let n = sys.n;
    let w = sys.curve.grid.weight();
    let mut b = DMatrix::<C64>::zeros(n * nodes + n, n * nodes);
    b.view_mut((0, 0), (n * nodes, n * nodes)).copy_from(a);
    for j in 0..n {
        for l in 0..nodes {
            b[(n * nodes + j, j * nodes + l)] = C64::from(w * sys.curve.speed(l));
        }
    }
    b
}

fn base_diagnostics(sys: &SingularSystem, tol: f64) -> Result<(NoetherDiagnostics, DMatrix<C64>, Vec<f64>)> {
    let check = symbol_check(sys);
    if !check.normal {
        return Err(Error::NotNormal {
            min_det_minus: check.min_det_minus,
            min_det_plus: check.min_det_plus,
            diagnostics: Some(Box::new(NoetherDiagnostics::not_normal(check, sys.nodes()))),
        });
    }
    let kappa = index(sys)?;
    let disc = discretize(sys);
    let layout = BlockLayout {
        blocks: sys.n,
        nodes: sys.nodes(),
    };
    let nulls = nullspaces(&disc.matrix, &disc.weights, &disc.weights, tol, Some(layout));
    let diag = NoetherDiagnostics {
        normal: true,
        min_det_minus: check.min_det_minus,
        min_det_plus: check.min_det_plus,
        kappa: Some(kappa),
        l: nulls.l,
        l_prime: nulls.l_prime,
        noether_consistent: nulls.l as i64 - nulls.l_prime as i64 == kappa,
        rank_reliable: nulls.reliable,
        spectral_gap: nulls.spectral_gap,
        spurious_right: nulls.spurious.0,
        spurious_left: nulls.spurious.1,
        residuals: Vec::new(),
        solvability_limit: 0.0,
        moments: Vec::new(),
        nodes: sys.nodes(),
    };
    Ok((diag, disc.matrix, disc.weights))
}

/// Symbol, index and kernel dimensions of the boundary integral system.
pub fn diagnose_poincare(problem: &PoincareProblem, nodes: usize) -> Result<NoetherDiagnostics> {
    let sys = assemble(problem, nodes)?;
    Ok(base_diagnostics(&sys, RANK_TOL)?.0)
}

/// Full pipeline: assemble, check normality, compute the index, solve the
/// bordered system and build the field evaluator.
///
/// The problem is solvable when the right-hand side is orthogonal to the
/// resolved adjoint kernel of the bordered system to within
/// `tol·max(1, ‖f‖)`.
pub fn solve_poincare(problem: &PoincareProblem, nodes: usize, tol: f64) -> Result<FieldSolution> {
    let sys = assemble(problem, nodes)?;
    let (mut diag, a, weights) = base_diagnostics(&sys, RANK_TOL)?;
    let n = sys.n;
    let b = bordered(&a, &sys);
    let mut row_w = weights.clone();
    row_w.extend(std::iter::repeat_n(1.0, n));
    let layout = BlockLayout { blocks: n, nodes };
    let nulls = nullspaces(&b, &row_w, &weights, RANK_TOL, Some(layout));
    let mut rhs = sys.rhs.clone();
    rhs.extend(std::iter::repeat_n(C64::new(0.0, 0.0), n));
    let rhs = DVector::from_vec(rhs);
    let out = solve(&b, &rhs, &row_w, &nulls, tol);

    let grid = sys.curve.grid.clone();
    let mu: Vec<C64> = out.mu.iter().map(|v| C64::from(v.re)).collect();
    diag.residuals = out.residuals.clone();
    diag.solvability_limit = out.limit;
    diag.moments = (0..n)
        .map(|j| {
            (0..nodes)
                .map(|l| grid.weight() * sys.curve.speed(l) * mu[j * nodes + l].re)
                .sum()
        })
        .collect();
    if out.status == SolveStatus::Unsolvable {
        return Err(Error::Unsolvable {
            residuals: out.residuals,
            diagnostics: Box::new(diag),
        });
    }
    // the border rows hold the moments only to within the solve residual;
    // remove what is left so the field stays bounded at infinity
    let mut mu = mu;
    for (j, &moment) in diag.moments.iter().enumerate() {
        let length: f64 = (0..nodes).map(|l| grid.weight() * sys.curve.speed(l)).sum();
        let total: f64 = (0..nodes)
            .map(|l| grid.weight() * sys.curve.speed(l) * mu[j * nodes + l].re.abs())
            .sum();
        if moment.abs() > (MOMENT_TOL * total).max(out.limit) {
            return Err(Error::MomentViolation { component: j, moment });
        }
        for v in &mut mu[j * nodes..(j + 1) * nodes] {
            *v -= moment / length;
        }
    }
    let density = BoundarySamples::new(grid.clone(), n, mu)?;
    let field = VekuaField::new(&problem.curve, &problem.coeffs, &density)?;
    let kernel_basis = out
        .kernel_basis
        .iter()
        .map(|v| BoundarySamples::new(grid.clone(), n, v.iter().map(|c| C64::from(c.re)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let fine_grid_residual = fine_grid_residual(problem, &density)?;
    let fnorm = sys.rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(FieldSolution {
        density,
        field,
        diagnostics: diag,
        kernel_basis,
        lsq_residual: out.lsq_residual,
        fine_grid_residual,
        fine_grid_tolerance: 10.0 * tol * fnorm.max(1.0),
    })
}

/// Interpolates the density to twice as many nodes and evaluates the
/// boundary condition there: `max_k,i |(Tμ)_k(θ_i) − f_k(θ_i)|`.
pub fn fine_grid_residual(problem: &PoincareProblem, density: &BoundarySamples) -> Result<f64> {
    let n = problem.n();
    let fine_nodes = 2 * density.grid().len();
    let sys = assemble(problem, fine_nodes)?;
    let disc = discretize(&sys);
    let mut mu = Vec::with_capacity(n * fine_nodes);
    for j in 0..n {
        mu.extend(resample(density.component(j), fine_nodes));
    }
    let mu = DVector::from_vec(mu.into_iter().map(|v| C64::from(v.re)).collect());
    let r = &disc.matrix * mu - disc.rhs;
    Ok(r.iter().map(|v| v.re.abs()).fold(0.0, f64::max))
}
