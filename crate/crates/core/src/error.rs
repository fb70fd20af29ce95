use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "one-sided Jacobi SVD did not converge after {sweeps} sweeps (largest relative off-diagonal {residual:.3e})"
    )]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("points not on a degree-2 curve (max residual {residual:.3e} > {tol:.3e})")]
    NotOnCurve { residual: f64, tol: f64 },

    #[error("quadratic coefficients vanish: the curve is a line, use the shifted Hermitian-plus-rank-one path")]
    LinearVariety,

    #[error("commutator solver failed: best residual {residual:.3e} after {restarts} restarts")]
    SolverFailure { residual: f64, restarts: usize },

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Dimension {
        op,
        detail: detail.into(),
    }
}
