use thiserror::Error;

/// Failure modes of the core algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("spectrum [{min:.6}, {max:.6}] leaves the admissible interval")]
    SpectrumOutOfRange { min: f64, max: f64 },
    #[error("spectral radius {radius:.12} is not below one")]
    SpectralRadiusTooLarge { radius: f64 },
    #[error("resolvent singular at theta = {theta:.6} (condition {condition:.3e})")]
    SingularResolvent { theta: f64, condition: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid reservoir projectors: {0}")]
    InvalidProjectors(String),
    #[error("reservoir symbol does not commute with the projectors (defect {defect:.3e})")]
    NotCommuting { defect: f64 },
    #[error("observable is not block diagonal (defect {defect:.3e})")]
    NotBlockDiagonal { defect: f64 },
    #[error("controllability rank {rank} is below the sample dimension {dim}")]
    KalmanFailed { rank: usize, dim: usize },
    #[error("splitting of eigenvalue group {group} is unresolved at first order")]
    UnresolvedSplitting { group: usize },
    #[error("{0} requires rank-one projectors")]
    NotRankOne(&'static str),
    #[error("{0} requires a simple spectrum")]
    NotSimple(&'static str),
    #[error("time {time} exceeds the truncation horizon {horizon}")]
    TruncationExceeded { time: usize, horizon: usize },
    #[error("eigensolver did not converge")]
    EigenFailure,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
