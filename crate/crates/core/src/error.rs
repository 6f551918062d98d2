use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFiniteInput,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not orthogonal (|QᵀQ - I|_F = {residual:.3e})")]
    NotOrthogonal { residual: f64 },

    #[error("generator is not skew-symmetric (|Ω + Ωᵀ|_F = {residual:.3e})")]
    NotSkew { residual: f64 },

    #[error("points lie in different connected components of O(n)")]
    DifferentComponents,

    #[error("no unique geodesic: largest phase {max_phase} is at or beyond the injectivity radius")]
    NonUniqueGeodesic { max_phase: f64 },

    #[error("relative rotation has a phase at π (largest |r| = {max_phase})")]
    PhaseAtPi { max_phase: f64 },

    #[error("C is the zero matrix; every orthogonal matrix is optimal")]
    ZeroMatrix,

    #[error("step leaves the injectivity domain: η·|Ω|₂ = {step_norm}")]
    StepOutsideInjectivity { step_norm: f64 },

    #[error("invalid step size {0}")]
    InvalidStepSize(f64),

    #[error("input is numerically singular (σ_min/σ_max = {ratio:.3e})")]
    SingularInput { ratio: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("factorization failed: {0}")]
    Factorization(&'static str),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
