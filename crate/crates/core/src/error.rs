use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),

    #[error("site index {index} out of range 1..={m}")]
    SiteOutOfRange { index: usize, m: usize },

    #[error("invalid initial pair (k1={k1}, k2={k2}) for M={m}, M1={m1}")]
    InvalidPair {
        k1: usize,
        k2: usize,
        m: usize,
        m1: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not a projector (residual {residual:.3e})")]
    NotProjector { residual: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("oracle cap exceeded: size {size} > cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("occupation {value} outside 0..={n}")]
    OccupationOutOfRange { value: usize, n: usize },

    #[error("degenerate marginal probability: {0}")]
    DegenerateMarginal(String),

    #[error("Gaussian channel degenerate: Im d(y,y|n,y) = 0")]
    GaussianDegenerate,

    #[error("no off-diagonal suppression: alpha~ - beta~ = {0:.3e} <= 0")]
    NoSuppression(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
