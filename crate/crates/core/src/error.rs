use thiserror::Error;

/// Errors produced by the library. Block and cell indices in messages are 1-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid partition {parts:?}: {reason}")]
    InvalidPartition { parts: Vec<usize>, reason: &'static str },

    #[error("size mismatch: lambda sums to {lambda} but mu sums to {mu}")]
    SizeMismatch { lambda: usize, mu: usize },

    #[error("table margins do not match: {0}")]
    MarginMismatch(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("d = {d} is out of range for this statistic (need {requirement})")]
    BadD { d: usize, requirement: String },

    #[error("d = {d} is outside the regime d <= lambda_I / 2 = {smallest_part}/2")]
    DOutOfRange { d: usize, smallest_part: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error(
        "hypothesis violated at cell ({row}, {col}): A_kl is nonempty but T_kl = 0 \
         (every nonempty cell must carry a positive table entry)"
    )]
    HypothesisViolated { row: usize, col: usize },

    #[error("distribution has zero mean; its size-bias transform is undefined")]
    ZeroMean,

    #[error("variance is zero; standardization is undefined")]
    ZeroVariance,

    #[error("empty sample")]
    EmptySample,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
