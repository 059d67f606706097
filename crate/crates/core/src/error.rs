use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file (JSON syntax, wrong shape, truncated payload).
    #[error("parse error: {0}")]
    Parse(String),

    /// Structurally well-formed input that violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown column `{0}`")]
    ColumnNotFound(String),

    /// The generator profile cannot produce a query (e.g. more predicates
    /// requested than candidate columns).
    #[error("generator profile infeasible: {0}")]
    ProfileInfeasible(String),

    #[error("workload has {queries} queries but the environment encodes at most {n_fixed}")]
    WorkloadTooLarge { queries: usize, n_fixed: usize },

    /// An agent proposed an action the mask forbids; callers must mask first.
    #[error("illegal action: column {column} is masked")]
    IllegalAction { column: usize },

    #[error("no permitted action remains")]
    AllMasked,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("policy architecture mismatch: {0}")]
    ArchMismatch(String),

    /// Reward and regret are undefined for non-positive costs.
    #[error("invalid cost {0}: cost must be positive")]
    InvalidCost(f64),

    #[error("enumeration too large: {configs} configurations exceed the limit of {limit}")]
    TooLarge { configs: u64, limit: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("database error: {0}")]
    Db(String),
}

impl Error {
    pub(crate) fn parse(context: &str, err: impl std::fmt::Display) -> Self {
        Error::Parse(format!("{context}: {err}"))
    }
}
