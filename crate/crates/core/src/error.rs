use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus mismatch: {left:?} vs {right:?}")]
    ModulusMismatch {
        left: Option<u64>,
        right: Option<u64>,
    },
    #[error("invalid modulus {0}: must satisfy 2 <= M <= 2^63 - 1")]
    InvalidModulus(u64),
    #[error("exponent offsets {left}/24 and {right}/24 differ by a non-integer")]
    OffsetGap { left: i64, right: i64 },
    #[error("leading coefficient {0} is not a unit")]
    NonUnitLeading(i128),
    #[error("operation needs an integral exponent offset, got {0}/24")]
    FractionalOffset(i64),
    #[error("integer overflow in exact coefficient arithmetic")]
    Overflow,
    #[error("insufficient precision for {context}: need {needed}, have {available}")]
    InsufficientPrecision {
        context: String,
        needed: usize,
        available: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unsupported prime p = {0}: spaces are only built for p in {{2, 3, 5}}")]
    UnsupportedPrime(u64),
    #[error("odd weight 2k = {0}: half-integral weight is not supported")]
    OddWeight(i64),
    #[error("monomials span rank {rank} but dim M_{k}(Gamma0({p})) = {dim}")]
    RankDeficient {
        p: u64,
        k: u64,
        rank: usize,
        dim: usize,
    },
    #[error("pivot {value} at exponent {exponent} is not a unit modulo {modulus}")]
    NonUnitPivot {
        exponent: usize,
        value: u64,
        modulus: u64,
    },
    #[error("nonzero residual at q^{index} ({context})")]
    NonzeroResidual { context: String, index: usize },
    #[error("Hecke index {index} shares a factor with the level {level}")]
    NotCoprimeToLevel { index: u64, level: u64 },
    #[error("order search exceeded cap {cap} (reached power {reached})")]
    OrderCapExceeded { cap: u64, reached: u64 },
    #[error("matrix is not invertible modulo {0}")]
    NotInvertible(u64),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
