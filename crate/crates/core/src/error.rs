use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum KippError {
    #[error("malformed input: {0}")]
    Input(String),
    #[error("matrix must be square with dim >= 1 (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("polynomial fit residual {residual:e} exceeds {bound:e}")]
    IllConditionedInterpolation { residual: f64, bound: f64 },
    #[error("matrix dimension {0} is outside the supported range 1..=12")]
    DimensionTooLarge(usize),
    #[error("expected an upper-triangular matrix")]
    NotUpperTriangular,
    #[error("expected a 5x5 matrix, got {0}x{0}")]
    NotDim5(usize),
    #[error("not a partial isometry within tolerance")]
    NotPartialIsometry,
    #[error("minor axis squared is negative ({0:e})")]
    NegativeMinorAxisSquared(f64),
    #[error("parameter {name} = {value} lies outside the admissible disc")]
    ParameterOutOfDisc { name: &'static str, value: String },
    #[error("flat construction needs positive mu_j, got mu_{index} = {value:e}")]
    InfeasibleMu { index: usize, value: f64 },
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for KippError {
    fn from(e: serde_json::Error) -> Self {
        KippError::Input(e.to_string())
    }
}

impl KippError {
    /// Process exit code: 2 for malformed input or arguments, 3 for a failed
    /// precondition on otherwise valid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            KippError::Input(_)
            | KippError::NotSquare { .. }
            | KippError::NonFinite
            | KippError::Io(_)
            | KippError::InvalidArgument(_)
            | KippError::BadDims(_)
            | KippError::ParameterOutOfDisc { .. }
            | KippError::InfeasibleMu { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, KippError>;
