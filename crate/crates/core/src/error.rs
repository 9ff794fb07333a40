use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment inequality fails: ∫χ r dr = {first} is not below 2∫χ r³ dr = {second}")]
    MomentInequality { first: f64, second: f64 },

    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },

    #[error(
        "adaptive quadrature gave up after {intervals} subintervals \
         (value {value}, error estimate {error_estimate:e}, tolerance {tol:e})"
    )]
    MaxDepthExceeded {
        intervals: usize,
        value: f64,
        error_estimate: f64,
        tol: f64,
    },

    #[error("point {0} lies outside the evaluation margin")]
    OutsideMargin(String),

    #[error("series truncation residual {residual:e} exceeds {threshold:e}")]
    Truncation { residual: f64, threshold: f64 },

    #[error("monomial index ({n}, {m}) outside table caps ({n_cap}, {m_cap})")]
    IndexOutOfRange {
        n: usize,
        m: usize,
        n_cap: usize,
        m_cap: usize,
    },

    #[error("moment underflow at index ({n}, {m})")]
    Underflow { n: usize, m: usize },

    #[error("symbol support [{lo}, {hi}] is not inside the plateau interior [0, {plateau_end})")]
    SupportLeak { lo: f64, hi: f64, plateau_end: f64 },

    #[error("limit column is not decreasing over the last {window} indices before cap {cap}")]
    CapTooSmall { cap: usize, window: usize },

    #[error("non-positive kernel diagonal {0}")]
    NonPositiveDiagonal(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
