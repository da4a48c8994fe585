use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown scheme `{name}`; valid names: {}", valid.join(", "))]
    UnknownScheme { name: String, valid: Vec<String> },

    #[error("invalid tableau `{name}`: {reason}")]
    InvalidTableau { name: String, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("stage {stage} has a pole: 1 - a_ii z vanishes")]
    Pole { stage: usize },

    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("linear solve failed in stage {stage}: {source}")]
    StageSolve {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite value in stage {stage}")]
    Divergence { stage: usize },

    #[error("step {step} (t = {t}) failed: {source}")]
    AtStep {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate stencil: {0}")]
    DegenerateStencil(String),

    #[error("Newton iteration failed after {iterations} iterations, residual {residual:e}")]
    NewtonFailure { iterations: usize, residual: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
