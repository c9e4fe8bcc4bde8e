use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("objective is non-convex: convexity margin {margin:.6e} <= 0")]
    NonConvex { margin: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ground-truth labels for the unlabeled set are not available")]
    MissingTruth,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("fixed point left the valid regime: {0}")]
    InvalidRegime(String),

    #[error("degenerate theory statistics: {0}")]
    DegenerateTheory(String),

    #[error("parse error at {path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("label {0} outside the accepted {{-1,+1}} / {{0,1}} encodings")]
    LabelDomain(f64),

    #[error("every grid point was skipped as invalid")]
    AllPointsInvalid,

    #[error("training diverged: loss became non-finite at epoch {epoch}")]
    DivergenceDetected { epoch: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class: 2 validation, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::LabelDomain(_)
            | Error::DimensionMismatch { .. }
            | Error::InsufficientSamples(_)
            | Error::MissingTruth
            | Error::Config(_) => 2,
            Error::SingularMatrix { .. }
            | Error::NoConvergence { .. }
            | Error::NonConvex { .. }
            | Error::InvalidRegime(_)
            | Error::DegenerateTheory(_)
            | Error::AllPointsInvalid
            | Error::DivergenceDetected { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}
