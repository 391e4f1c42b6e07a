use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:.3e})")]
    EigenNoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("alpha = {alpha} is invalid: exp(i*{j}*alpha) is real")]
    InvalidAlpha { alpha: f64, j: usize },

    #[error("invalid polynomial family: {0}")]
    InvalidFamily(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot extract a pure state from the zero matrix")]
    ZeroMatrix,

    #[error("infeasible: smallest attainable residual {min_residual:.6e} exceeds epsilon {epsilon:.6e}")]
    Infeasible { min_residual: f64, epsilon: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input or a violated contract, as
    /// opposed to numerical failures or I/O.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidAlpha { .. }
                | Error::InvalidFamily(_)
                | Error::InvalidPovm(_)
                | Error::Precondition(_)
                | Error::ZeroMatrix
                | Error::Parse(_)
                | Error::Json(_)
        )
    }
}
