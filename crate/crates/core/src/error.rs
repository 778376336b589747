use std::fmt;

use thiserror::Error;

use crate::sie::NoetherDiagnostics;

/// Named solvability conditions that a right-hand side can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvabilityCondition {
    /// `∫ f₁ dθ = 0` for the Schwarz problem that determines `φ`.
    ZeroMeanF1,
    /// `∫ f₂ dθ = 0` for the data that enters `ψ′` (or `φ` in the special Neumann case).
    ZeroMeanF2,
}

impl fmt::Display for SolvabilityCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolvabilityCondition::ZeroMeanF1 => write!(f, "zero-mean condition on f1 (∫f1 dθ = 0)"),
            SolvabilityCondition::ZeroMeanF2 => write!(f, "zero-mean condition on f2 (∫f2 dθ = 0)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate curve at θ = {theta}: |t′(θ)| = {speed:e}")]
    DegenerateCurve { theta: f64, speed: f64 },

    #[error("curve must be counterclockwise (signed area {area:e})")]
    WrongOrientation { area: f64 },

    #[error("curve passes through the origin (distance {distance:e})")]
    CurveThroughOrigin { distance: f64 },

    #[error("component {component} is not elliptic: a = {a}, a·c − b² = {discriminant}")]
    NotElliptic {
        component: usize,
        a: f64,
        discriminant: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {point} is too close to the boundary (distance {distance:e} < guard {guard:e})")]
    TooCloseToBoundary {
        point: num_complex::Complex64,
        distance: f64,
        guard: f64,
    },

    #[error("invalid order k = {0}")]
    InvalidOrder(i64),

    #[error("{condition} violated: moment = {moment:.4}")]
    SolvabilityViolated {
        condition: SolvabilityCondition,
        moment: f64,
    },

    #[error("density moment ∫μ_{component} ds = {moment:e} is not zero; field would grow logarithmically")]
    MomentViolation { component: usize, moment: f64 },

    #[error("nonzero R term is not supported for decomposable problems")]
    UnsupportedRTerm,

    #[error(
        "system is not normally solvable (min |det(α−πiβ)| = {min_det_minus:e}, min |det(α+πiβ)| = {min_det_plus:e})"
    )]
    NotNormal {
        min_det_minus: f64,
        min_det_plus: f64,
        diagnostics: Option<Box<NoetherDiagnostics>>,
    },

    #[error("symbol phase could not be resolved after refining to {nodes} nodes")]
    PhaseResolutionExceeded { nodes: usize },

    #[error("system is unsolvable: solvability residuals {residuals:?}")]
    Unsolvable {
        residuals: Vec<f64>,
        diagnostics: Box<NoetherDiagnostics>,
    },

    #[error("finite-difference stencil of half-width {reach:e} crosses the boundary (distance {distance:e})")]
    StencilCrossesBoundary { reach: f64, distance: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
