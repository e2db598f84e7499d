use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),
    #[error("orbital {orbital} is not in configuration {config:?}")]
    IndexNotInConfiguration { orbital: usize, config: Vec<usize> },
    #[error("pair indices must differ (got {0} twice)")]
    EqualPairIndices(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite potential sample at grid point {0}")]
    NonFinitePotential(usize),
    #[error("rank-deficient orbital set (smallest Gram eigenvalue {0:.3e})")]
    RankDeficient(f64),
    #[error("regularization parameter must be positive, got {0}")]
    InvalidRegularization(f64),
    #[error("occupation {0} lies outside [0, 1]")]
    OccupationOutOfRange(f64),
    #[error("reduced densities are implemented for orders 1 and 2, not {0}")]
    UnsupportedOrder(usize),
    #[error("density matrix is singular at t = {t}: smallest occupation {mu:.3e}")]
    SingularDensity { mu: f64, t: f64 },
    #[error("integrator diverged at t = {t}")]
    IntegratorDiverged { t: f64, last_good: Box<crate::propagation::McState> },
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("occupation spectrum is degenerate (gap {0:.3e})")]
    DegenerateSpectrum(f64),
    #[error("full-CI dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("(N = {n}, K = {k}) is not an admissible rank")]
    NotAdmissible { n: usize, k: usize },
    #[error("wavefunctions live in different bases")]
    BasisMismatch,
    #[error("energy descent stalled after {0} iterations")]
    StalledDescent(usize),
    #[error("unknown verification suite '{0}'")]
    UnknownSuite(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
