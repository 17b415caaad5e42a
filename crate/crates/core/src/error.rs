//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("not Hermitian: max |M - M\u{2020}| = {defect:.3e} exceeds tolerance {tol:.3e}")]
    NonHermitian { defect: f64, tol: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} below -{tol:.3e}")]
    NotPositive { min_eigenvalue: f64, tol: f64 },

    #[error("trace {trace} is not within {tol:.3e} of 1")]
    NotNormalized { trace: f64, tol: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operand lists have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("eigensolver failed to converge")]
    ConvergenceFailure,

    #[error("scalar function undefined at eigenvalue {eigenvalue}")]
    DomainError { eigenvalue: f64 },

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("mixture weight must be non-negative, got {0}")]
    NegativeWeight(f64),

    #[error("amplitude is numerically singular (smallest singular value {0:.3e})")]
    SingularAmplitude(f64),

    #[error("operator is numerically singular (smallest eigenvalue {0:.3e})")]
    SingularOperator(f64),

    #[error("curve is not closed: endpoint trace distance {0:.3e}")]
    NotClosed(f64),

    #[error("vanishing overlap between adjacent curve vectors at step {0}")]
    VanishingOverlap(usize),

    #[error("curve must contain at least {needed} states, got {got}")]
    CurveTooShort { needed: usize, got: usize },

    #[error("curve grid must be strictly increasing at index {0}")]
    GridNotIncreasing(usize),

    #[error("adjacent curve states too far apart at step {step}: trace distance {distance:.3e} exceeds {tol:.3e}")]
    CurveStepTooLarge { step: usize, distance: f64, tol: f64 },

    #[error("amplitude does not reproduce its state: defect {defect:.3e} exceeds {tol:.3e}")]
    NotAnAmplitude { defect: f64, tol: f64 },

    #[error("Kraus operators do not sum to identity: completeness defect {defect:.3e}")]
    NotTracePreserving { defect: f64 },

    #[error("vector is not normalized: norm {0}")]
    NotUnitVector(f64),

    #[error("{0}")]
    InvalidInput(String),
}
