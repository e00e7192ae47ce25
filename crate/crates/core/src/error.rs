use thiserror::Error;

/// Errors raised by the arithmetic and solver layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("negative input: {0}")]
    Negative(String),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("modulus {p}^{prec} does not fit in 63 bits")]
    ModulusTooLarge { p: u32, prec: u32 },
    #[error("{0} is not a unit")]
    NotUnit(String),
    #[error("{0} is not divisible by p")]
    NotDivisible(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("cancelled")]
    Cancelled,
}

pub type Result<T> = std::result::Result<T, Error>;
