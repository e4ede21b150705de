use thiserror::Error;

/// Failure modes of the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M†| = {deviation:e})")]
    NonHermitianInput { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("unsupported matrix dimension {0} (must be 1..=4)")]
    UnsupportedDimension(usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGround { gap: f64 },
    #[error("spectral gap closed (gap {gap:e})")]
    GapClosed { gap: f64 },
    #[error("inconsistent sweep configuration: {0}")]
    ConfigInconsistent(String),
    #[error("invalid T2 relaxation time: {0}")]
    InvalidT2(String),
    #[error("no preparation-angle branch reproduces the ground state (best infidelity {infidelity:e})")]
    NoValidBranch { infidelity: f64 },
    #[error("segment index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("unknown figure '{0}'")]
    UnknownFigure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
