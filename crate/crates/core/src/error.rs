use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("non-finite value for id `{id}`")]
    NonFinite { id: String },
    #[error("no negative controls: at least one row with role `nc` is required")]
    NoNegativeControls,
    #[error("no test statistics")]
    NoTestStatistics,
    #[error("unknown role `{token}` on line {line} (expected `test` or `nc`)")]
    UnknownRole { token: String, line: usize },
    #[error("unknown truth label `{token}` on line {line} (expected `null` or `nonnull`)")]
    UnknownTruth { token: String, line: usize },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("malformed CSV on line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty p-value vector")]
    EmptyPValues,
    #[error("p-value at position {0} is zero")]
    ZeroPValue(usize),
    #[error("paired treatment/control measurements missing for id `{0}`")]
    MissingPairedRaw(String),
    #[error("degenerate scale estimate (all values equal)")]
    DegenerateScale,
    #[error("Poisson regression did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("fitted log-density is not concave at its mode")]
    NonConcave,
    #[error("too few points: need at least {needed}, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("subgroups: {0}")]
    Subgroups(String),
    #[error("simulation ground truth missing")]
    MissingTruth,
    #[error("statistic undefined on permuted sample")]
    UndefinedStatistic,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
