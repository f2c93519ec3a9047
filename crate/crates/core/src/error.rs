use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Ways a Markov specification can fail validation. Each invariant has its
/// own variant so callers can tell which one was violated.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovViolation {
    #[error("transition matrix is empty")]
    Empty,
    #[error("transition matrix row {row} has length {len}, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("transition entry ({row}, {col}) = {value} is negative or not finite")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("transition row {row} sums to {sum}, not 1")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("stationary vector has length {len}, expected {expected}")]
    StationaryLength { len: usize, expected: usize },
    #[error(
        "stationary vector is not a probability vector (entry {index} = {value}, total {total})"
    )]
    NotDistribution {
        index: usize,
        value: f64,
        total: f64,
    },
    #[error("pi is not stationary: |(pi Q)_{index} - pi_{index}| = {residual}")]
    NotStationary { index: usize, residual: f64 },
    #[error("detailed balance fails at ({i}, {j}): |pi_i Q_ij - pi_j Q_ji| = {residual}")]
    NotReversible { i: usize, j: usize, residual: f64 },
    #[error("observable has length {len}, expected {expected}")]
    ObservableLength { len: usize, expected: usize },
    #[error("observable is not centered: sum pi_i f_i = {mean}")]
    Uncentered { mean: f64 },
    #[error("chain is not irreducible: state {to} unreachable from state {from}")]
    Reducible { from: usize, to: usize },
    #[error("stationary distribution is not unique (singular system)")]
    NoUniqueStationary,
    #[error("chain has {states} states, the eigensolver supports at most {max}")]
    TooManyStates { states: usize, max: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("path is empty")]
    EmptyPath,
    #[error("coefficient list is empty")]
    EmptyCoefficients,
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("length {0} is not a power of two; use dft_at for arbitrary lengths")]
    NotPowerOfTwo(usize),
    #[error("invalid markov specification: {0}")]
    Markov(#[from] MarkovViolation),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "observable carries spectral weight {weight} on eigenvalue {eigenvalue} (non-ergodic)"
    )]
    UnitEigenvalueWeight { eigenvalue: f64, weight: f64 },
    #[error("degenerate frequency theta={theta}: g(theta)={g}")]
    DegenerateFrequency { theta: f64, g: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed JSON at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
