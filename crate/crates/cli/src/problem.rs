//! Problem files: versioned JSON with unknown fields rejected.

use std::path::Path;

use poincare_core::bitsadze::BoundaryMatrixPreset;
use poincare_core::decomposable::{MatrixFn, PoincareProblem, ScalarFn};
use poincare_core::geometry::{Curve, EllipticCoefficients, FourierTable};
use poincare_core::quadrature::PeriodicGrid;
use poincare_core::sie::{scalar_system, SingularSystem};
use poincare_core::C64;
use serde::{Deserialize, Serialize};

use crate::InputError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub problem: ProblemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Decomposable(DecomposableSpec),
    Bitsadze(BitsadzeSpec),
    Singular(SingularSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    UnitCircle {},
    Ellipse { a: f64, b: f64 },
    Star { eps: f64, k: usize },
    Trigonometric { x: FourierTable, y: FourierTable },
}

impl CurveSpec {
    pub fn build(&self) -> Result<Curve, InputError> {
        let curve = match self {
            CurveSpec::UnitCircle {} => Ok(Curve::unit_circle()),
            CurveSpec::Ellipse { a, b } => Curve::ellipse(*a, *b),
            CurveSpec::Star { eps, k } => Curve::star(*eps, *k),
            CurveSpec::Trigonometric { x, y } => Curve::trigonometric(x.clone(), y.clone()),
        };
        curve.map_err(|e| InputError::new(format!("curve: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// Either a named preset or explicit `P`, `Q` (and optionally `R`) tables, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<BoundaryPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<FourierTable>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<FourierTable>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<FourierTable>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPreset {
    /// `P = diag(ν_x)`, `Q = diag(ν_y)` with ν the unit normal into D⁻.
    NormalDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposableSpec {
    pub curve: CurveSpec,
    pub coeffs: CoefficientSpec,
    pub boundary: BoundarySpec,
    pub f: Vec<FourierTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitsadzeSpec {
    pub preset: BoundaryMatrixPreset,
    #[serde(default)]
    pub f1: FourierTable,
    #[serde(default)]
    pub f2: FourierTable,
    /// Free real constant `K` of the special Neumann solution.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub constant: f64,
    /// Number of null-family members for the dirichlet and neumann presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// Scalar singular integral equation `α μ + (β/πi) PV∫ μ/(τ−t) dτ = f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularSpec {
    pub curve: CurveSpec,
    pub alpha: FourierTable,
    pub beta: FourierTable,
    #[serde(default)]
    pub f: FourierTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    /// Polar grid `"r0:r1:nr,t0:t1:nt"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| InputError::new(format!("problem file: {e}")))?;
        if file.version != SCHEMA_VERSION {
            return Err(InputError::new(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError::new(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical pretty JSON with a trailing newline; `parse(to_canonical(p)) == p`.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files serialize");
        s.push('\n');
        s
    }

    pub fn nodes(&self) -> Option<usize> {
        self.solver.as_ref().and_then(|s| s.nodes)
    }

    pub fn tol(&self) -> Option<f64> {
        self.solver.as_ref().and_then(|s| s.tol)
    }

    pub fn grid(&self) -> Option<&str> {
        self.output.as_ref().and_then(|o| o.grid.as_deref())
    }
}

fn matrix_from_rows(rows: &[Vec<FourierTable>], n: usize, name: &str) -> Result<MatrixFn, InputError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(InputError::new(format!("{name} must be {n}x{n}")));
    }
    MatrixFn::from_tables(n, rows.iter().flatten().cloned().collect())
        .map_err(|e| InputError::new(format!("{name}: {e}")))
}

impl DecomposableSpec {
    pub fn build(&self) -> Result<PoincareProblem, InputError> {
        let curve = self.curve.build()?;
        let coeffs = EllipticCoefficients::new(self.coeffs.a.clone(), self.coeffs.b.clone(), self.coeffs.c.clone())
            .map_err(|e| InputError::new(format!("coeffs: {e}")))?;
        let n = coeffs.len();
        let b = &self.boundary;
        let (p, q) = match (b.preset, &b.p, &b.q) {
            (Some(BoundaryPreset::NormalDerivative), None, None) => {
                let normal = |c: &Curve, part: usize| {
                    let c = c.clone();
                    ScalarFn::func(move |t| {
                        let nu = c.frame(t).map(|f| f.normal).unwrap_or(C64::new(0.0, 0.0));
                        if part == 0 {
                            nu.re
                        } else {
                            nu.im
                        }
                    })
                };
                (
                    MatrixFn::diagonal((0..n).map(|_| normal(&curve, 0)).collect()),
                    MatrixFn::diagonal((0..n).map(|_| normal(&curve, 1)).collect()),
                )
            }
            (None, Some(p), Some(q)) => (matrix_from_rows(p, n, "P")?, matrix_from_rows(q, n, "Q")?),
            _ => return Err(InputError::new("boundary needs either a preset or both p and q")),
        };
        let r = b.r.as_ref().map(|r| matrix_from_rows(r, n, "R")).transpose()?;
        let f = self.f.iter().cloned().map(ScalarFn::Table).collect();
        PoincareProblem::with_r(curve, coeffs, p, q, r, f).map_err(|e| InputError::new(e.to_string()))
    }
}

impl SingularSpec {
    pub fn build(&self, nodes: usize) -> Result<SingularSystem, InputError> {
        let curve = self.curve.build()?;
        let grid = PeriodicGrid::new(nodes).map_err(|e| InputError::new(e.to_string()))?;
        let (a, b, f) = (self.alpha.clone(), self.beta.clone(), self.f.clone());
        Ok(scalar_system(
            curve.sample(&grid),
            move |t| a.eval(t).into(),
            move |t| b.eval(t).into(),
            move |t| f.eval(t).into(),
        ))
    }
}
