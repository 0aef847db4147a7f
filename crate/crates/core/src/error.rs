use thiserror::Error;

use crate::exponents::Violation;
use crate::helmholtz::SolveReport;

pub type Result<T, E = LapError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LapError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("field contains a non-finite sample at flat index {index}")]
    NonFinite { index: usize },

    #[error("symbol is not finite at xi = {xi:?}")]
    NonFiniteSymbol { xi: Vec<f64> },

    #[error("exponent domain error: {0}")]
    Domain(String),

    #[error("{system} exponents not admissible: {}", format_violations(.violations))]
    Admissibility {
        system: &'static str,
        violations: Vec<Violation>,
    },

    #[error("lattice resonance: |zeta - |xi|^2| = {distance:e} at |xi|^2 = {shell}")]
    Resonance { shell: f64, distance: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("kernel evaluated at its singularity z = 0")]
    Singularity,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "Krylov solve did not converge after {} iterations (relative residual {:e}); I - K may be near-singular",
        .report.iterations, .report.relative_residual
    )]
    NonConvergence { report: Box<SolveReport> },

    #[error("singular value probe failed: {0}")]
    ProbeFailure(String),

    #[error("invalid medium: {0}")]
    Medium(String),

    #[error("malformed field snapshot: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LapError {
    /// True for errors caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LapError::Resonance { .. }
                | LapError::NonConvergence { .. }
                | LapError::ProbeFailure(_)
                | LapError::NonFiniteSymbol { .. }
        )
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
