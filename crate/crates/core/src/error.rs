use thiserror::Error;

use crate::fields::FieldDescriptor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime {0} exceeds the supported bound 2^31")]
    PrimeTooLarge(u64),

    #[error("p-adic precision must be at least 1")]
    ZeroPrecision,

    #[error("descriptor mismatch: {left} vs {right}")]
    DescriptorMismatch {
        left: FieldDescriptor,
        right: FieldDescriptor,
    },

    /// Every tracked digit of a sum cancelled. The true value is only known
    /// to be divisible by `p^absolute`.
    #[error("all tracked digits cancelled: result is zero modulo p^{absolute}")]
    PrecisionExhausted { absolute: i64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("denominator {den} is divisible by p = {p}")]
    DenominatorDivisibleByP { den: String, p: u64 },

    #[error("square roots in Q_2 are not supported")]
    UnsupportedQ2Sqrt,

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("search budget exceeded: {required} candidates, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("witness search needs a prime field, got {0}")]
    SearchRequiresPrimeField(FieldDescriptor),

    #[error("witness does not certify a magic contraction: {0}")]
    InvalidWitness(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Cesaro weight 1/{weight} is not invertible over F_{p}")]
    CesaroWeightNotInvertible { weight: u64, p: u64 },

    #[error("polynomial degree {degree} exceeds dilation order {order}")]
    DegreeExceedsOrder { degree: usize, order: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
