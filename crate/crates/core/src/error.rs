use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("integer overflow in 2x2 matrix arithmetic")]
    Overflow,
    #[error("matrix is not integral after conjugation")]
    NonIntegral,
    #[error("matrix determinant is {0}, expected 1")]
    NotUnimodular(String),
    #[error("determinant {0} is not a positive power of two")]
    NotDyadic(i64),
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("diagram has {actual} stones, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("diagram {0} does not have identity monodromy")]
    InvalidDiagram(String),
    #[error("position {position} out of range for a diagram of {len} stones")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("harsh table has no entry for stones ({0}, {1})")]
    TableMiss(char, char),
    #[error("rule does not match at position {0}")]
    NoMatch(usize),
    #[error("rule {lhs} -> {rhs} does not preserve monodromy")]
    RuleMonodromy { lhs: String, rhs: String },
    #[error("rule {lhs} -> {rhs}: {message}")]
    BadRule {
        lhs: String,
        rhs: String,
        message: String,
    },
    #[error("profile ({0}, {1}) does not occur among valid diagrams")]
    UnknownProfile(usize, usize),
    #[error("malformed map: {0}")]
    MalformedMap(String),
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
