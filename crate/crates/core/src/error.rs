use thiserror::Error;

/// Everything that can go wrong inside the census engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("invalid invariant factor {0}: every factor must be at least 2")]
    InvalidFactor(u64),
    #[error("a group needs at least one invariant factor")]
    EmptyFactors,
    #[error("group of order {0} exceeds the supported maximum of 64 elements")]
    GroupTooLarge(u64),
    #[error("coordinate tuple has length {got}, expected {expected}")]
    CoordinateLength { expected: usize, got: usize },
    #[error("subgroup lattice exceeds the cap of {0} subgroups")]
    LatticeTooLarge(usize),
    #[error("element set contains the identity")]
    IdentityInOmega,
    #[error("element set is not closed under invertible powering")]
    NotClosed,
    #[error("class index {0} is out of range")]
    ClassIndex(usize),
    #[error("beta sum {0} is not an integer")]
    NonIntegralBeta(String),
    #[error("every class meets Omega, so x0 is undefined")]
    UndefinedX0,
    #[error("{0} does not divide the group order")]
    NotWild(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parameter vector has {got} entries, expected {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("parameters must be positive rationals")]
    NonPositiveParam,
    #[error("invalid bound: {0}")]
    InvalidBound(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("family of images does not generate the group")]
    NotGenerating,
    #[error("no witness surjection with gamma = {gamma} and minimal delta")]
    WitnessNotFound { gamma: u32 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("ratio undefined: the denominator slice vanishes at every checkpoint")]
    UndefinedRatio,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CensusError {
    fn from(e: std::io::Error) -> Self {
        CensusError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CensusError>;
