use thiserror::Error;

/// Malformed arguments: wrong dimensions, asymmetric matrices and the like.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Failures caused by the geometry of a sample set.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("interpolation matrix is rank deficient (rank {rank} of {required})")]
    RankDeficient { rank: usize, required: usize },
    #[error("not enough samples: have {have}, need {need}")]
    TooFewSamples { have: usize, need: usize },
    #[error("pivot {index} has magnitude {pivot:e}, below the acceptance threshold")]
    PoorlyPoised { index: usize, pivot: f64 },
    #[error("could not find a geometry-improving point for pivot {index} (best {pivot:e})")]
    ImprovementFailed { index: usize, pivot: f64 },
    #[error("linear model gradient vanished (norm {0:e})")]
    ZeroGradient(f64),
    #[error(transparent)]
    Input(#[from] InputError),
}

/// Error returned by an objective callback.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// The caller asked the solver to stop; not treated as a failure.
    #[error("evaluation stopped by user")]
    Stop,
    #[error("objective evaluation failed: {0}")]
    Failed(String),
}
