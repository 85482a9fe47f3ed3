use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid photon-number set: {0}")]
    InvalidNodes(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("binomial C({upper}, {lower}) overflows 128-bit integers")]
    BinomialOverflow { upper: i64, lower: i64 },

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("pole: {0}")]
    Pole(String),

    #[error("transmission |T| = {0} exceeds 1")]
    InvalidTransmission(f64),

    #[error("all cofactors of row {row} vanish; the homogeneous system is degenerate")]
    DegenerateCofactors { row: usize },

    #[error("determinant residual {residual:e} exceeds tolerance {tolerance:e}; T does not solve the gate condition")]
    NotAGate { residual: f64, tolerance: f64 },

    #[error("photon number {photons} exceeds the oracle cap of {cap}")]
    PhotonCap { photons: u32, cap: u32 },

    #[error("N = {n} exceeds the supported maximum of {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("signal state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
}
