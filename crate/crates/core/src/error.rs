use thiserror::Error;

/// Errors produced anywhere in the modeling / synthesis / simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is singular to working precision (pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("matrix order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("polynomial degree must be at least 1")]
    EmptyPolynomial,

    #[error("complex root {0} has no conjugate partner")]
    UnpairedConjugate(num_complex::Complex64),

    #[error("invalid pendulum parameters: {0}")]
    InvalidParams(String),

    #[error("sampling period must be positive and finite, got {0}")]
    InvalidPeriod(f64),

    #[error("system is not controllable (rank {rank} < {required})")]
    Uncontrollable { rank: usize, required: usize },

    #[error("expected {expected} desired poles, got {got}")]
    PoleCount { expected: usize, got: usize },

    #[error("pole placement verification failed: coefficient residual {residual:e}")]
    SynthesisFailed { residual: f64 },

    #[error("closed loop has a pole at the DC point; feedforward gain is undefined")]
    ClosedLoopIntegrator,

    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),

    #[error("trajectory is empty")]
    EmptyTrajectory,
}

pub type Result<T> = std::result::Result<T, Error>;
