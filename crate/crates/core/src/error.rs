use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("capacity exceeded: {what} = {requested} (maximum {limit})")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("point is outside the branch domain")]
    OutsideDomain,
    #[error("prefix too short: index {required} must be readable")]
    Horizon { required: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("missing table entry for {0}")]
    MissingEntry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
