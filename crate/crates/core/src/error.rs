use thiserror::Error;

use crate::partitions::Partition;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("weight {weight} exceeds the enumeration cap {cap}")]
    WeightCap { weight: u32, cap: u32 },
    #[error("coefficient of {partition} is unknown: weight above the truncation bound {max_weight}")]
    Truncation { partition: Partition, max_weight: u32 },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("{q} is not a power of {p}")]
    NotPrimePower { q: u32, p: u32 },
    #[error("{i} is not in N_{p}")]
    NotInNp { i: u32, p: u32 },
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("class is not in L_p; first inconsistent coefficient at {witness}")]
    NotInLp { witness: Partition },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("cache i/o: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
