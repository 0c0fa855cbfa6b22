use thiserror::Error;

/// Errors produced by the operator algebra, solvers and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid operator specification: {0}")]
    InvalidSpec(String),

    #[error("degenerate operator: all coefficient matrices vanish")]
    DegenerateOperator,

    #[error("operator is not maximal rank: {0}")]
    NotMaximalRank(String),

    #[error("rank of the symbol is not constant: rank {found} at lattice frequency {at:?}, expected {expected}")]
    NotConstantRank {
        at: Vec<i64>,
        found: usize,
        expected: usize,
    },

    #[error("annihilator pair is not verified exact")]
    UnverifiedPair,

    #[error("annihilator exactness fails at sample {sample} (xi = {xi:?}): {detail}")]
    ExactnessViolation {
        sample: usize,
        xi: Vec<f64>,
        detail: String,
    },

    #[error("domain mask is empty")]
    EmptyMask,

    #[error("domain mask touches the padded region")]
    MaskTouchesPadding,

    #[error("inconsistent linear system: residual {residual:.3e}")]
    InconsistentSystem { residual: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("file format error: {0}")]
    Format(String),

    #[error("unknown catalog name: {0}")]
    UnknownCatalogName(String),

    #[error("invalid catalog parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
