//! Dominant-plus-compact singular integral systems
//!
//! ```text
//! T μ = α(t) μ(t) − β(t) PV∫_S μ(τ)/(τ − t) dτ + ∫_S K(t, τ) μ(τ) dτ = f(t)
//! ```
//!
//! with n×n matrix coefficients, discretized by a Nyström rule on a periodic
//! grid. Besides the linear solve this module computes the Noether
//! quantities: the symbol determinants `det(α ± πiβ)`, the index κ, the
//! kernel dimensions `l`, `l′` of `T` and its adjoint, and the solvability
//! residuals against the adjoint kernel.
//!
//! Vectors are stored component-major: entry `a·N + i` is component `a` at node `i`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::SampledCurve;
use crate::quadrature::{high_frequency_fraction, pv_cauchy_matrix, resample};
use crate::{Error, Result, C64};

/// Threshold on `min |det(α ± πiβ)|` below which a system is not normal.
pub const SYMBOL_TOL: f64 = 1e-10;
/// Default relative rank tolerance on singular values.
pub const RANK_TOL: f64 = 1e-8;
/// Largest high-frequency energy fraction for a null vector to count as resolved.
pub const RESOLUTION_TOL: f64 = 1e-2;
const MAX_REFINEMENT: usize = 8;

#[derive(Debug, Clone)]
pub struct SingularSystem {
    pub curve: SampledCurve,
    pub n: usize,
    pub alpha: Vec<DMatrix<C64>>,
    pub beta: Vec<DMatrix<C64>>,
    /// `K_ab(t_i, τ_j)` at row `a·N + i`, column `b·N + j`, diagonal limit included.
    pub kernel: Option<DMatrix<C64>>,
    pub rhs: Vec<C64>,
    /// The operator maps real densities to real data; the discrete operator is
    /// then taken to be the real part of the Nyström matrix.
    pub real_valued: bool,
}

impl SingularSystem {
    pub fn new(
        curve: SampledCurve,
        n: usize,
        alpha: Vec<DMatrix<C64>>,
        beta: Vec<DMatrix<C64>>,
        kernel: Option<DMatrix<C64>>,
        rhs: Vec<C64>,
    ) -> Result<Self> {
        let nodes = curve.len();
        if alpha.len() != nodes || beta.len() != nodes {
            return Err(Error::DimensionMismatch(format!(
                "symbol given at {}/{} nodes, grid has {nodes}",
                alpha.len(),
                beta.len()
            )));
        }
        if alpha.iter().chain(&beta).any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch(format!("symbol blocks must be {n}x{n}")));
        }
        if let Some(k) = &kernel {
            if k.nrows() != n * nodes || k.ncols() != n * nodes {
                return Err(Error::DimensionMismatch(format!(
                    "kernel is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    n * nodes,
                    n * nodes
                )));
            }
        }
        if rhs.len() != n * nodes {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} entries, expected {}",
                rhs.len(),
                n * nodes
            )));
        }
        Ok(SingularSystem {
            curve,
            n,
            alpha,
            beta,
            kernel,
            rhs,
            real_valued: false,
        })
    }

    pub fn with_real_values(mut self, real: bool) -> Self {
        self.real_valued = real;
        self
    }

    pub fn nodes(&self) -> usize {
        self.curve.len()
    }

    /// Arc-length quadrature weights `w·|t′(θ_i)|`, repeated per component.
    pub fn arc_weights(&self) -> Vec<f64> {
        let w = self.curve.grid.weight();
        let per_node: Vec<f64> = (0..self.nodes()).map(|i| w * self.curve.speed(i)).collect();
        per_node.iter().copied().cycle().take(self.n * self.nodes()).collect()
    }
}

/// Dense Nyström operator and right-hand side.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub matrix: DMatrix<C64>,
    pub rhs: DVector<C64>,
    /// Inner-product weights of the unknowns (and of the equations).
    pub weights: Vec<f64>,
    pub n: usize,
    pub nodes: usize,
}

/// Nyström matrix: row block `i` is `α(t_i)μ_i − β(t_i)(Sμ)_i + Σ_j w K(t_i, τ_j) μ_j t′(θ_j)`.
pub fn discretize(sys: &SingularSystem) -> Discretization {
    let nn = sys.nodes();
    let n = sys.n;
    let w = sys.curve.grid.weight();
    let s = pv_cauchy_matrix(&sys.curve);
    let mut a = DMatrix::<C64>::zeros(n * nn, n * nn);
    for ra in 0..n {
        for cb in 0..n {
            for i in 0..nn {
                let beta = sys.beta[i][(ra, cb)];
                let row = ra * nn + i;
                if beta != C64::new(0.0, 0.0) {
                    for j in 0..nn {
                        a[(row, cb * nn + j)] -= beta * s[(i, j)];
                    }
                }
                a[(row, cb * nn + i)] += sys.alpha[i][(ra, cb)];
                if let Some(k) = &sys.kernel {
                    for j in 0..nn {
                        a[(row, cb * nn + j)] += w * k[(row, cb * nn + j)] * sys.curve.d1[j];
                    }
                }
            }
        }
    }
    if sys.real_valued {
        a.iter_mut().for_each(|v| v.im = 0.0);
    }
    Discretization {
        matrix: a,
        rhs: DVector::from_vec(sys.rhs.clone()),
        weights: sys.arc_weights(),
        n,
        nodes: nn,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolCheck {
    pub min_det_minus: f64,
    pub min_det_plus: f64,
    pub normal: bool,
}

fn symbol_dets(alpha: &DMatrix<C64>, beta: &DMatrix<C64>) -> (C64, C64) {
    let pi_i = C64::new(0.0, PI);
    let plus = (alpha + beta * pi_i).lu().determinant();
    let minus = (alpha - beta * pi_i).lu().determinant();
    (minus, plus)
}

/// `min |det(α − πiβ)|`, `min |det(α + πiβ)|` over the nodes.
pub fn symbol_check(sys: &SingularSystem) -> SymbolCheck {
    let mut min_minus = f64::INFINITY;
    let mut min_plus = f64::INFINITY;
    for (a, b) in sys.alpha.iter().zip(&sys.beta) {
        let (m, p) = symbol_dets(a, b);
        min_minus = min_minus.min(m.norm());
        min_plus = min_plus.min(p.norm());
    }
    SymbolCheck {
        min_det_minus: min_minus,
        min_det_plus: min_plus,
        normal: min_minus > SYMBOL_TOL && min_plus > SYMBOL_TOL,
    }
}

/// Unwrapped phase increment of a closed sample loop, in turns, and the
/// largest single-step increment.
pub fn winding(values: &[C64]) -> (f64, f64) {
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for i in 0..values.len() {
        let next = values[(i + 1) % values.len()];
        let step = (next / values[i]).arg();
        max_step = max_step.max(step.abs());
        total += step;
    }
    (total / (2.0 * PI), max_step)
}

fn refine_matrices(mats: &[DMatrix<C64>], m: usize) -> Vec<DMatrix<C64>> {
    let n = mats[0].nrows();
    let mut out = vec![DMatrix::<C64>::zeros(n, n); m];
    for r in 0..n {
        for c in 0..n {
            let entry: Vec<C64> = mats.iter().map(|a| a[(r, c)]).collect();
            for (k, v) in resample(&entry, m).into_iter().enumerate() {
                out[k][(r, c)] = v;
            }
        }
    }
    out
}

/// Index `κ = (1/2π)[arg det(α + iπβ)/det(α − iπβ)]_S`.
///
/// The symbol is refined by trigonometric interpolation (up to 8× the
/// original node count) until every phase step is below π/2.
pub fn index(sys: &SingularSystem) -> Result<i64> {
    let check = symbol_check(sys);
    if !check.normal {
        return Err(Error::NotNormal {
            min_det_minus: check.min_det_minus,
            min_det_plus: check.min_det_plus,
            diagnostics: None,
        });
    }
    let base = sys.nodes();
    let mut factor = 1;
    loop {
        let m = base * factor;
        let (alpha, beta) = if factor == 1 {
            (sys.alpha.clone(), sys.beta.clone())
        } else {
            (refine_matrices(&sys.alpha, m), refine_matrices(&sys.beta, m))
        };
        let ratio: Vec<C64> = alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| {
                let (minus, plus) = symbol_dets(a, b);
                plus / minus
            })
            .collect();
        let (turns, max_step) = winding(&ratio);
        if max_step < PI / 2.0 {
            return Ok(turns.round() as i64);
        }
        if factor >= MAX_REFINEMENT {
            return Err(Error::PhaseResolutionExceeded { nodes: m });
        }
        factor *= 2;
    }
}

/// Block layout used to separate resolved null vectors from grid-scale artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub blocks: usize,
    pub nodes: usize,
}

/// Thin SVD `(U, sigma, V)` with `sigma` nonincreasing.
pub fn thin_svd(m: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>, DMatrix<C64>) {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    if p == 0 {
        return (DMatrix::zeros(rows, 0), Vec::new(), DMatrix::zeros(cols, 0));
    }
    let a = faer::Mat::<C64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = a.thin_svd().expect("svd converges");
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let sigma: Vec<f64> = (0..p).map(|i| s[i].re).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    (
        DMatrix::from_fn(rows, p, |r, c| u[(r, order[c])]),
        order.iter().map(|&i| sigma[i]).collect(),
        DMatrix::from_fn(cols, p, |r, c| v[(r, order[c])]),
    )
}

/// SVD of `W_r^{1/2} A W_c^{-1/2}` (zero-padded to square) with the weights it was built from.
#[derive(Debug, Clone)]
pub struct WeightedSvd {
    rows: usize,
    cols: usize,
    u: DMatrix<C64>,
    v: DMatrix<C64>,
    sigma: Vec<f64>,
    row_sqrt: Vec<f64>,
    col_sqrt: Vec<f64>,
}

impl WeightedSvd {
    pub fn new(matrix: &DMatrix<C64>, row_weights: &[f64], col_weights: &[f64]) -> Self {
        let (m, k) = matrix.shape();
        assert_eq!(row_weights.len(), m);
        assert_eq!(col_weights.len(), k);
        let row_sqrt: Vec<f64> = row_weights.iter().map(|w| w.sqrt()).collect();
        let col_sqrt: Vec<f64> = col_weights.iter().map(|w| w.sqrt()).collect();
        let size = m.max(k);
        let mut padded = DMatrix::<C64>::zeros(size, size);
        for i in 0..m {
            for j in 0..k {
                padded[(i, j)] = matrix[(i, j)] * (row_sqrt[i] / col_sqrt[j]);
            }
        }
        let (u, sigma, v) = thin_svd(&padded);
        WeightedSvd {
            rows: m,
            cols: k,
            u,
            v,
            sigma,
            row_sqrt,
            col_sqrt,
        }
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    fn cutoff(&self, tol: f64) -> f64 {
        tol * self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Minimum-norm least-squares solution in the weighted norms.
    pub fn solve_min_norm(&self, rhs: &DVector<C64>, tol: f64) -> DVector<C64> {
        let cut = self.cutoff(tol);
        let size = self.sigma.len();
        let mut f = DVector::<C64>::zeros(size);
        for i in 0..self.rows {
            f[i] = rhs[i] * self.row_sqrt[i];
        }
        let mut x = DVector::<C64>::zeros(size);
        for (c, &s) in self.sigma.iter().enumerate() {
            if s > cut && s > 0.0 {
                let coef = self.u.column(c).dotc(&f) / s;
                x.axpy(coef, &self.v.column(c), C64::new(1.0, 0.0));
            }
        }
        DVector::from_fn(self.cols, |j, _| x[j] / self.col_sqrt[j])
    }
}

/// Null spaces of a discrete operator and its weighted adjoint.
#[derive(Debug, Clone)]
pub struct NullspaceReport {
    pub svd: WeightedSvd,
    pub tol: f64,
    /// Resolved kernel vectors of `T` (unweighted coordinates).
    pub right: Vec<DVector<C64>>,
    /// Resolved kernel vectors of the adjoint `T*` (unweighted coordinates).
    pub left: Vec<DVector<C64>>,
    pub l: usize,
    pub l_prime: usize,
    /// Numerical null directions rejected as under-resolved (right, left).
    pub spurious: (usize, usize),
    /// Ratio of the smallest accepted to the largest rejected singular value.
    pub spectral_gap: f64,
    pub reliable: bool,
    /// Leading entries that hold grid functions (the rest are border rows or columns).
    pub function_len: usize,
    pub layout: Option<BlockLayout>,
}

/// Orthonormal basis of the span of `vectors` restricted to their first `len` entries.
fn restricted_basis(vectors: &[DVector<C64>], len: usize) -> Vec<DVector<C64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(len, vectors.len(), |r, c| vectors[c][r]);
    let (u, sigma, _) = thin_svd(&m);
    sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.5)
        .map(|(c, _)| u.column(c).into_owned())
        .collect()
}

/// Splits an orthonormal set into (resolved, spurious count) by Fourier tail energy per block.
fn resolved_subspace(basis: Vec<DVector<C64>>, layout: Option<BlockLayout>) -> (Vec<DVector<C64>>, usize) {
    let Some(layout) = layout else {
        return (basis, 0);
    };
    if basis.is_empty() {
        return (basis, 0);
    }
    let nn = layout.nodes;
    let len = layout.blocks * nn;
    // high-pass image of each basis vector, block by block
    let high: Vec<Vec<C64>> = basis
        .iter()
        .map(|v| {
            let mut out = Vec::with_capacity(len);
            for b in 0..layout.blocks {
                let block: Vec<C64> = (0..nn).map(|i| v[b * nn + i]).collect();
                let c = crate::quadrature::fourier_coefficients(&block);
                let mut hp = vec![C64::new(0.0, 0.0); nn];
                for (k, ck) in c.iter().enumerate() {
                    if crate::quadrature::wavenumber(k, nn).unsigned_abs() as usize >= nn / 4 {
                        hp[k] = *ck * (nn as f64).sqrt();
                    }
                }
                out.extend(hp);
            }
            out
        })
        .collect();
    let h = DMatrix::from_fn(len, basis.len(), |r, c| high[c][r]);
    let (_, sigma, v) = thin_svd(&h);
    let mut resolved = Vec::new();
    for idx in 0..basis.len() {
        let s = sigma.get(idx).copied().unwrap_or(0.0);
        if s < RESOLUTION_TOL {
            let mut combo = DVector::<C64>::zeros(basis[0].len());
            for (c, b) in basis.iter().enumerate() {
                combo.axpy(v[(c, idx)], b, C64::new(1.0, 0.0));
            }
            resolved.push(combo);
        }
    }
    let spurious = basis.len() - resolved.len();
    (resolved, spurious)
}

/// Kernels of `A` and of its adjoint with respect to the weighted inner
/// products `⟨u, v⟩ = Σ w_j u_j v̄_j`.
///
/// Null directions are singular vectors with `σ < tol·σ_max`. A square
/// discretization always has as many left as right null directions, so when
/// a block layout is given, directions whose Fourier tail (|k| ≥ N/4)
/// carries more than 1% of their energy are treated as grid artifacts and
/// counted separately.
pub fn nullspaces(
    matrix: &DMatrix<C64>,
    row_weights: &[f64],
    col_weights: &[f64],
    tol: f64,
    layout: Option<BlockLayout>,
) -> NullspaceReport {
    let svd = WeightedSvd::new(matrix, row_weights, col_weights);
    let (m, k) = (svd.rows, svd.cols);
    let cut = svd.cutoff(tol);
    let null_idx: Vec<usize> = (0..svd.sigma.len()).filter(|&i| svd.sigma[i] <= cut).collect();

    let raw_right: Vec<DVector<C64>> = null_idx.iter().map(|&c| svd.v.column(c).into_owned()).collect();
    let raw_left: Vec<DVector<C64>> = null_idx.iter().map(|&c| svd.u.column(c).into_owned()).collect();
    let right_basis = restricted_basis(&raw_right, k);
    let left_basis = restricted_basis(&raw_left, m);

    let (right_res, spurious_right) = resolved_subspace(right_basis, layout);
    let (left_res, spurious_left) = resolved_subspace(left_basis, layout);

    let right: Vec<DVector<C64>> = right_res
        .into_iter()
        .map(|v| DVector::from_fn(k, |j, _| v[j] / svd.col_sqrt[j]))
        .collect();
    let left: Vec<DVector<C64>> = left_res
        .into_iter()
        .map(|u| DVector::from_fn(m, |i, _| u[i] / svd.row_sqrt[i]))
        .collect();

    let smallest_accepted = svd
        .sigma
        .iter()
        .copied()
        .filter(|&s| s > cut)
        .fold(f64::INFINITY, f64::min);
    let largest_rejected = svd.sigma.iter().copied().filter(|&s| s <= cut).fold(0.0_f64, f64::max);
    let spectral_gap = if smallest_accepted.is_infinite() {
        0.0
    } else if largest_rejected > 0.0 {
        smallest_accepted / largest_rejected
    } else if cut > 0.0 {
        smallest_accepted / cut
    } else {
        f64::INFINITY
    };
    NullspaceReport {
        l: right.len(),
        l_prime: left.len(),
        right,
        left,
        spurious: (spurious_right, spurious_left),
        reliable: spectral_gap >= 10.0,
        spectral_gap,
        function_len: layout.map_or(m, |l| l.blocks * l.nodes),
        layout,
        svd,
        tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solvable,
    Unsolvable,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Minimum-norm particular solution `μ₀`.
    pub mu: DVector<C64>,
    pub status: SolveStatus,
    /// `|⟨f, μ*_k⟩|` for each resolved adjoint null vector, scaled to unit sup-norm.
    pub residuals: Vec<f64>,
    /// Resolved kernel basis: the general solution is `μ₀ + Σ c_k μ_k`.
    pub kernel_basis: Vec<DVector<C64>>,
    /// `max |Aμ₀ − f|`.
    pub lsq_residual: f64,
    /// Threshold the residuals were compared against.
    pub limit: f64,
}

/// Solvability residuals `|Σ_j w_j f_j conj(y_j)|` for adjoint null vectors
/// normalized so that `max_j |y_j| = 1` over the first `len` entries.
pub fn solvability_residuals(left: &[DVector<C64>], rhs: &DVector<C64>, weights: &[f64], len: usize) -> Vec<f64> {
    left.iter()
        .map(|y| {
            let scale = (0..len).map(|j| y[j].norm()).fold(0.0, f64::max);
            let s: C64 = (0..len).map(|j| rhs[j] * y[j].conj() * weights[j]).sum();
            if scale > 0.0 {
                s.norm() / scale
            } else {
                0.0
            }
        })
        .collect()
}

/// Largest Fourier coefficient with `|k| ≥ 3N/8` relative to the largest
/// overall, maximized over blocks. Zero for a zero vector.
pub fn spectral_tail(values: &DVector<C64>, layout: BlockLayout) -> f64 {
    let nn = layout.nodes;
    (0..layout.blocks)
        .map(|b| {
            let block: Vec<C64> = (0..nn).map(|i| values[b * nn + i]).collect();
            let c = crate::quadrature::fourier_coefficients(&block);
            let top = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let tail = c
                .iter()
                .enumerate()
                .filter(|(k, _)| 8 * crate::quadrature::wavenumber(*k, nn).unsigned_abs() as usize >= 3 * nn)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            if top > 0.0 {
                tail / top
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Solves `Aμ = f` in the minimum-norm sense and decides solvability from
/// the residuals against the adjoint kernel. Solvable iff every residual is
/// at most `max(tol, τ)·max(1, ‖f‖)`, where `τ` is the largest spectral
/// tail of the adjoint null vectors (their discretization error, when a
/// block layout is known).
pub fn solve(
    matrix: &DMatrix<C64>,
    rhs: &DVector<C64>,
    weights: &[f64],
    nulls: &NullspaceReport,
    tol: f64,
) -> SolveOutcome {
    let mu = nulls.svd.solve_min_norm(rhs, nulls.tol);
    let residuals = solvability_residuals(&nulls.left, rhs, weights, nulls.function_len.min(rhs.len()));
    let fnorm = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = nulls.layout.map_or(0.0, |l| {
        nulls.left.iter().map(|y| spectral_tail(y, l)).fold(0.0, f64::max)
    });
    let limit = tol.max(tail) * fnorm.max(1.0);
    let status = if residuals.iter().all(|&r| r <= limit) {
        SolveStatus::Solvable
    } else {
        SolveStatus::Unsolvable
    };
    let lsq_residual = (matrix * &mu - rhs).iter().map(|v| v.norm()).fold(0.0, f64::max);
    SolveOutcome {
        mu,
        status,
        residuals,
        kernel_basis: nulls.right.clone(),
        lsq_residual,
        limit,
    }
}

/// Everything the Noether theory says about a discretized system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoetherDiagnostics {
    pub normal: bool,
    pub min_det_minus: f64,
    pub min_det_plus: f64,
    pub kappa: Option<i64>,
    pub l: usize,
    pub l_prime: usize,
    /// `l − l′ = κ` held for the computed counts.
    pub noether_consistent: bool,
    pub rank_reliable: bool,
    pub spectral_gap: f64,
    pub spurious_right: usize,
    pub spurious_left: usize,
    pub residuals: Vec<f64>,
    /// Threshold applied to `residuals`.
    pub solvability_limit: f64,
    pub moments: Vec<f64>,
    pub nodes: usize,
}

impl NoetherDiagnostics {
    pub fn not_normal(check: SymbolCheck, nodes: usize) -> Self {
        NoetherDiagnostics {
            normal: false,
            min_det_minus: check.min_det_minus,
            min_det_plus: check.min_det_plus,
            kappa: None,
            l: 0,
            l_prime: 0,
            noether_consistent: false,
            rank_reliable: false,
            spectral_gap: 0.0,
            spurious_right: 0,
            spurious_left: 0,
            residuals: Vec::new(),
            solvability_limit: 0.0,
            moments: Vec::new(),
            nodes,
        }
    }
}

/// Symbol check, index and kernel counts of a system, without solving it.
pub fn diagnose(sys: &SingularSystem, tol: f64) -> Result<(NoetherDiagnostics, Discretization, NullspaceReport)> {
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
    Ok((diag, disc, nulls))
}

/// Scalar system on a curve with symbol given by closures and no compact part.
pub fn scalar_system(
    curve: SampledCurve,
    alpha: impl Fn(f64) -> C64,
    beta: impl Fn(f64) -> C64,
    rhs: impl Fn(f64) -> C64,
) -> SingularSystem {
    let nodes = curve.grid.nodes();
    let one = |v: C64| DMatrix::from_element(1, 1, v);
    let a = nodes.iter().map(|&t| one(alpha(t))).collect();
    let b = nodes.iter().map(|&t| one(beta(t))).collect();
    let f = nodes.iter().map(|&t| rhs(t)).collect();
    SingularSystem::new(curve, 1, a, b, None, f).expect("consistent scalar system")
}

/// Tail energy test used for the resolution filter, exposed for diagnostics.
pub fn is_resolved(values: &[C64]) -> bool {
    high_frequency_fraction(values) < RESOLUTION_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curve;
    use crate::quadrature::PeriodicGrid;

    fn circle(n: usize) -> SampledCurve {
        Curve::unit_circle().sample(&PeriodicGrid::new(n).unwrap())
    }

    fn c(x: f64) -> C64 {
        C64::from(x)
    }

    #[test]
    fn identity_operator() {
        let sys = scalar_system(circle(16), |_| c(1.0), |_| c(0.0), |_| c(0.0));
        let d = discretize(&sys);
        assert!((d.matrix.clone() - DMatrix::<C64>::identity(16, 16)).norm() < 1e-15);
    }

    #[test]
    fn pure_singular_rows_sum_to_plemelj_constant() {
        let sys = scalar_system(circle(32), |_| c(0.0), |t| c(1.0 + 0.5 * t.cos()), |_| c(0.0));
        let d = discretize(&sys);
        for i in 0..32 {
            let row: C64 = d.matrix.row(i).iter().sum();
            let beta = 1.0 + 0.5 * sys.curve.grid.theta(i).cos();
            assert!((row + C64::new(0.0, PI) * beta).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_solve() {
        let sys = scalar_system(circle(16), |_| c(PI), |_| c(0.0), |_| c(1.0));
        let (diag, disc, nulls) = diagnose(&sys, RANK_TOL).unwrap();
        assert_eq!(diag.kappa, Some(0));
        assert_eq!((diag.l, diag.l_prime), (0, 0));
        let out = solve(&disc.matrix, &disc.rhs, &disc.weights, &nulls, 1e-8);
        assert_eq!(out.status, SolveStatus::Solvable);
        for v in out.mu.iter() {
            assert!((v - c(1.0 / PI)).norm() < 1e-14);
        }
    }

    #[test]
    fn symbol_check_examples() {
        let s = symbol_check(&scalar_system(circle(16), |_| c(PI), |_| c(0.0), |_| c(0.0)));
        assert!((s.min_det_minus - PI).abs() < 1e-14 && (s.min_det_plus - PI).abs() < 1e-14 && s.normal);
        let s = symbol_check(&scalar_system(
            circle(16),
            |t| c(t.cos()),
            |t| c(t.sin() / PI),
            |_| c(0.0),
        ));
        assert!((s.min_det_minus - 1.0).abs() < 1e-14 && (s.min_det_plus - 1.0).abs() < 1e-14 && s.normal);
        let s = symbol_check(&scalar_system(circle(16), |_| c(0.0), |_| c(0.0), |_| c(0.0)));
        assert_eq!((s.min_det_minus, s.min_det_plus, s.normal), (0.0, 0.0, false));
        assert!(matches!(
            index(&scalar_system(circle(16), |_| c(0.0), |_| c(0.0), |_| c(0.0))),
            Err(Error::NotNormal { .. })
        ));
    }

    #[test]
    fn index_examples() {
        assert_eq!(
            index(&scalar_system(circle(16), |_| c(PI), |_| c(0.0), |_| c(0.0))).unwrap(),
            0
        );
        assert_eq!(
            index(&scalar_system(
                circle(16),
                |t| c(t.cos()),
                |t| c(t.sin() / PI),
                |_| c(0.0)
            ))
            .unwrap(),
            2
        );
        assert_eq!(
            index(&scalar_system(
                circle(16),
                |t| c(t.cos()),
                |t| c(-t.sin() / PI),
                |_| c(0.0)
            ))
            .unwrap(),
            -2
        );
    }

    #[test]
    fn index_refines_fast_phase() {
        // g = e^{6iθ} takes 4.7 rad per step on 8 nodes and needs 32
        let sys = scalar_system(
            circle(8),
            |t| c((3.0 * t).cos()),
            |t| c((3.0 * t).sin() / PI),
            |_| c(0.0),
        );
        assert_eq!(index(&sys).unwrap(), 6);
        // symbol passing within 1e-4 of zero: the phase turns by π over a tiny arc
        let eps = 1e-4;
        let sys = scalar_system(circle(8), |t| c(eps + t.cos() - 1.0), |t| c(t.sin() / PI), |_| c(0.0));
        assert!(matches!(index(&sys), Err(Error::PhaseResolutionExceeded { nodes: 64 })));
    }

    #[test]
    fn nullspace_examples() {
        let id = DMatrix::<C64>::identity(4, 4);
        let r = nullspaces(&id, &[1.0; 4], &[1.0; 4], RANK_TOL, None);
        assert_eq!((r.l, r.l_prime), (0, 0));
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(1.0), c(0.0)]));
        let r = nullspaces(&d, &[1.0; 3], &[1.0; 3], RANK_TOL, None);
        assert_eq!((r.l, r.l_prime), (1, 1));
        assert!((r.right[0][2].norm() - 1.0).abs() < 1e-14);
        assert!(r.right[0][0].norm() < 1e-14 && r.right[0][1].norm() < 1e-14);
    }

    #[test]
    fn rectangular_nullspaces() {
        // [1 1] has a one-dimensional kernel and no cokernel
        let wide = DMatrix::from_row_slice(1, 2, &[c(1.0), c(1.0)]);
        let r = nullspaces(&wide, &[1.0], &[1.0, 1.0], RANK_TOL, None);
        assert_eq!((r.l, r.l_prime), (1, 0));
        let tall = wide.transpose();
        let r = nullspaces(&tall, &[1.0, 1.0], &[1.0], RANK_TOL, None);
        assert_eq!((r.l, r.l_prime), (0, 1));
        assert!((r.left[0][0] + r.left[0][1]).norm() < 1e-14);
    }

    #[test]
    fn synthetic_index_two_kernel() {
        let sys = scalar_system(circle(64), |t| c(t.cos()), |t| c(t.sin() / PI), |_| c(0.0));
        let (diag, disc, nulls) = diagnose(&sys, RANK_TOL).unwrap();
        assert_eq!(diag.kappa, Some(2));
        assert_eq!((diag.l, diag.l_prime), (2, 0));
        assert!(diag.noether_consistent);
        let out = solve(&disc.matrix, &disc.rhs, &disc.weights, &nulls, 1e-8);
        assert_eq!(out.status, SolveStatus::Solvable);
        assert!(out.mu.norm() < 1e-14);
        assert_eq!(out.kernel_basis.len(), 2);
        for v in &out.kernel_basis {
            assert!((&disc.matrix * v).norm() < 1e-10 * v.norm());
        }
    }

    #[test]
    fn weighted_min_norm_matches_plain_pseudo_inverse_for_unit_weights() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        let svd = WeightedSvd::new(&a, &[1.0, 1.0], &[1.0, 1.0]);
        let x = svd.solve_min_norm(&DVector::from_vec(vec![c(1.0), c(2.0)]), 1e-12);
        // minimum-norm solution of x + 2y = 1 is (1, 2)/5
        assert!((x[0] - c(0.2)).norm() < 1e-14 && (x[1] - c(0.4)).norm() < 1e-14);
    }

    #[test]
    fn dimension_checks() {
        let curve = circle(8);
        let one = DMatrix::from_element(1, 1, c(1.0));
        assert!(SingularSystem::new(
            curve.clone(),
            1,
            vec![one.clone(); 7],
            vec![one.clone(); 8],
            None,
            vec![c(0.0); 8]
        )
        .is_err());
        assert!(SingularSystem::new(
            curve.clone(),
            1,
            vec![one.clone(); 8],
            vec![one.clone(); 8],
            None,
            vec![c(0.0); 9]
        )
        .is_err());
        let k = DMatrix::<C64>::zeros(4, 4);
        assert!(SingularSystem::new(curve, 1, vec![one.clone(); 8], vec![one; 8], Some(k), vec![c(0.0); 8]).is_err());
    }

    #[test]
    fn spectral_tail_of_band_limited_and_aliased_vectors() {
        let n = 32;
        let layout = BlockLayout { blocks: 2, nodes: n };
        let smooth = DVector::from_fn(2 * n, |i, _| c((2.0 * PI * (i % n) as f64 / n as f64).cos()));
        assert!(spectral_tail(&smooth, layout) < 1e-14);
        let rough = DVector::from_fn(2 * n, |i, _| if i >= n && i % 2 == 1 { c(1.0) } else { c(0.0) });
        assert!((spectral_tail(&rough, layout) - 1.0).abs() < 1e-12);
        assert_eq!(spectral_tail(&DVector::zeros(2 * n), layout), 0.0);
    }
}
