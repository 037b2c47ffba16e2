use thiserror::Error;

use crate::control::NonConvergence;

/// Errors produced by the model, control and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quantum number: {0}")]
    QuantumNumber(String),

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("operator is not Hermitian (asymmetry {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("detuning must be nonzero")]
    ZeroDetuning,

    #[error("code state |J={j}, m_J={m}> is not in the basis")]
    CodeStateAbsent { j: String, m: String },

    #[error("invalid pulse sequence: {0}")]
    InvalidSequence(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("optimizer did not converge: best residual {:.3e} after {} restarts", .0.best_residual, .0.restarts)]
    NonConvergence(Box<NonConvergence>),

    #[error("fit refused: {0}")]
    FitRefused(String),

    #[error("protected cycles need a coding sequence")]
    MissingCoding,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
