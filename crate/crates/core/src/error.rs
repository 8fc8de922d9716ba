use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("symbol {symbol} out of range 0..{limit}")]
    SymbolOutOfRange { symbol: u64, limit: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("root bracket failure: {0}")]
    RootBracket(String),
    #[error("target not monotone on bracket: {0}")]
    NotMonotone(String),
    #[error("chain propagation failed at link {link}: {reason}")]
    ChainPropagation { link: usize, reason: String },
    #[error("no threshold applies for N1K={n1}, N2K={n2}")]
    NoThreshold { n1: usize, n2: usize },
}
