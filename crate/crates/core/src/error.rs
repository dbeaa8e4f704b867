use thiserror::Error;

use crate::padic::Valuation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("{n} is composite (divisible by {factor})")]
    Composite { n: u64, factor: u64 },

    #[error("{u} is not a primitive root mod {p}: order check failed, {u}^{exponent} = 1 mod {p}")]
    NotPrimitiveRoot { u: u64, p: u64, exponent: u64 },

    #[error("residue {a} is zero mod {p}")]
    ZeroResidue { a: i64, p: u64 },

    #[error("Bernoulli index {index} is not an even integer in [2, {max}]")]
    BernoulliIndex { index: u64, max: u64 },

    #[error("operands disagree on prime or precision (p={p1}, K={k1} vs p={p2}, K={k2})")]
    Mismatch { p1: u64, k1: u32, p2: u64, k2: u32 },

    #[error("coefficient modulus {p}^{k} does not fit below 2^32")]
    PrecisionTooLarge { p: u64, k: u32 },

    #[error("element is not a unit at pi (valuation {0})")]
    NonUnit(Valuation),

    #[error("requested pi-adic precision {requested} exceeds {max} = K(p-1)")]
    PrecisionOverflow { requested: u32, max: u32 },

    #[error("precision K = {k} is too low, need K >= {needed}")]
    InsufficientPrecision { k: u32, needed: u32 },

    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },

    #[error("cannot parse coefficient {0:?}")]
    Parse(String),

    #[error("{0}")]
    OutOfRange(String),
}
