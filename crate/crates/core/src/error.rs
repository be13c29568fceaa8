use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid coordinate at point {point}, dimension {dim}")]
    InvalidCoordinate { point: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("k exceeds dataset size (k = {k}, n = {n})")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("core distances missing")]
    CoreDistancesMissing,
    #[error("separation predicate requires the mutual reachability metric")]
    MetricMismatch,
    #[error("invalid weight window [{lo}, {hi})")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("expected a spanning tree with {expected} edges, found {found}")]
    NotSpanning { expected: usize, found: usize },
    #[error("edge set is not a connected spanning tree")]
    Disconnected,
    #[error("point id {id} out of range for n = {n}")]
    PointOutOfRange { id: usize, n: usize },
    #[error("need at least {need} points, found {found}")]
    TooFewPoints { need: usize, found: usize },
    #[error("epsilon must be non-negative")]
    NegativeEpsilon,
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
