//! Library side of the `poincare` command: problem files, argument
//! shorthands and the subcommands, each returning a process exit code.

pub mod commands;
pub mod output;
pub mod problem;
pub mod terms;

use std::fmt;

/// Exit codes: a stable contract.
pub mod exit {
    pub const SOLVABLE: i32 = 0;
    /// Numerical failure not covered below, or a failed certificate.
    pub const FAILURE: i32 = 1;
    pub const UNSOLVABLE: i32 = 2;
    pub const NOT_NORMAL: i32 = 3;
    pub const INPUT: i32 = 4;
}

/// Malformed or inconsistent user input.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl InputError {
    pub fn new(msg: impl Into<String>) -> Self {
        InputError(msg.into())
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Exit code for a solver error.
pub fn exit_code(err: &poincare_core::Error) -> i32 {
    use poincare_core::Error as E;
    match err {
        E::Unsolvable { .. } | E::SolvabilityViolated { .. } | E::MomentViolation { .. } => exit::UNSOLVABLE,
        E::NotNormal { .. } => exit::NOT_NORMAL,
        E::InvalidInput(_)
        | E::DimensionMismatch(_)
        | E::InvalidGrid(_)
        | E::NotElliptic { .. }
        | E::DegenerateCurve { .. }
        | E::WrongOrientation { .. }
        | E::CurveThroughOrigin { .. }
        | E::UnsupportedRTerm
        | E::InvalidOrder(_) => exit::INPUT,
        E::PhaseResolutionExceeded { .. } | E::TooCloseToBoundary { .. } | E::StencilCrossesBoundary { .. } => {
            exit::FAILURE
        }
    }
}
