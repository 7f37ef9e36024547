use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate")]
    NonFiniteCoordinate,
    #[error("grid resolution must be at least 1, got {0}")]
    InvalidResolution(usize),
    #[error("no other site")]
    NoOtherSite,
    #[error("site index {index} out of range for {len} sites")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("coincident sites {0} and {1}")]
    CoincidentSites(usize, usize),
    #[error("degenerate cell")]
    DegenerateCell,
    #[error("lemma requires β ≥ 4 (got {0})")]
    BetaTooSmall(f64),
    #[error("n = {n} too small for the bound: need log n > β = {beta}")]
    LogGuard { n: u64, beta: f64 },
    #[error("n too small for grid construction (n = {0})")]
    NTooSmall(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
