use thiserror::Error;

use crate::constellation::Point;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{what} guard exceeded: {actual} > {limit}")]
    GuardExceeded {
        what: &'static str,
        limit: u64,
        actual: u64,
    },

    #[error("code at level {level} is not linear")]
    NotLinear { level: usize },

    #[error("chain is not nested: C_{level} is not contained in C_{next}", next = level + 1)]
    NotNested { level: usize },

    #[error("point {0} is not a member of the constellation")]
    NotMember(Point),

    #[error("generators do not span a full-rank lattice (rank {rank} < {n})")]
    RankDeficient { rank: usize, n: usize },

    #[error("operation requires {expected} levels, chain has {found}")]
    LevelCount { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two routes that must agree did not; indicates a bug rather than a property of the input.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
