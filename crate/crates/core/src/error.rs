use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Row `0` (0-based) has Euclidean norm at or below the zero-row tolerance.
    #[error("row {} has zero norm", .0 + 1)]
    ZeroRow(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("at least {needed} rows required, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("matrix must have at least as many rows as columns ({rows} x {cols})")]
    Underdetermined { rows: usize, cols: usize },

    #[error("non-finite entry at row {}, column {}", .row + 1, .col + 1)]
    NonFinite { row: usize, col: usize },

    #[error("matrix is rank deficient (sigma_min / sigma_max = {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("rows {} and {} are parallel (mu = {mu})", .r + 1, .s + 1)]
    DegeneratePair { r: usize, s: usize, mu: f64 },

    #[error("no pair of non-parallel rows exists")]
    NoUsablePair,

    #[error("row index {} out of range for {m} rows", .index + 1)]
    IndexOutOfRange { index: usize, m: usize },

    #[error("invalid scaled condition number R = {0} (must be >= 1)")]
    InvalidR(f64),

    #[error("invalid coherence pair: delta = {delta}, Delta = {big_delta}")]
    InvalidCoherence { delta: f64, big_delta: f64 },

    #[error("correlation mu = {0} is degenerate")]
    DegenerateMu(f64),

    #[error("Delta = {0} too close to 1; noise threshold is unbounded")]
    DegenerateDelta(f64),

    #[error("invalid contraction factor eta = {0} (must satisfy 0 <= eta < 1)")]
    InvalidEta(f64),

    #[error("system too large for exhaustive enumeration: m = {m} > {limit}")]
    TooLarge { m: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
