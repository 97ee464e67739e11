use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A probability or other bounded scalar lies outside its admissible range.
    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The vector handed to the syndrome former is not in the LDGM code.
    #[error("input is not a codeword of the LDGM code ({violated} parity checks violated)")]
    NotACodeword { violated: usize },

    #[error("infeasible code parameters: {0}")]
    InfeasibleCode(String),

    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("infeasible rate split: {0}")]
    InfeasibleSplit(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that `value` is a finite number in the closed interval `[lo, hi]`.
pub(crate) fn check_closed(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Domain { name, value, range })
    }
}
