use thiserror::Error;

use crate::lattice::LatticeVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero vector has no primitive direction")]
    ZeroVector,
    #[error("degenerate cone spanned by {0} and {1}")]
    DegenerateCone(LatticeVector, LatticeVector),
    #[error("a fan needs at least 3 distinct rays, got {0}")]
    TooFewRays(usize),
    #[error("rays {0} and {1} are parallel")]
    ParallelRays(LatticeVector, LatticeVector),
    #[error("rays do not form a complete fan: cone between {0} and {1} is not strictly convex")]
    NotComplete(LatticeVector, LatticeVector),
    #[error("{0} is already a ray of the fan")]
    DuplicateRay(LatticeVector),
    #[error("{0} is not a ray of the fan")]
    UnknownRay(LatticeVector),
    #[error("removing {ray} merges {left} and {right} into a cone that is not strictly convex")]
    NotContractible {
        ray: LatticeVector,
        left: LatticeVector,
        right: LatticeVector,
    },
    #[error("fan does not refine the target fan: {0}")]
    NotRefinement(String),
    #[error("divisors live on different fans")]
    FanMismatch,
    #[error("invalid divisor: {0}")]
    InvalidDivisor(String),
    #[error("invalid generalized pair: {0}")]
    InvalidPair(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown fixture or case `{0}`")]
    UnknownCase(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
