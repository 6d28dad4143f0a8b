//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the exact and numeric routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The Kronecker symbol `(0 | 0)` has no value.
    #[error("the Kronecker symbol (0|0) is undefined")]
    KroneckerUndefined,

    /// A system of congruences has no common solution.
    #[error("inconsistent congruences: {0}")]
    InconsistentCongruences(String),

    /// `-D` is not the discriminant of an imaginary quadratic field.
    #[error("-{0} is not a fundamental discriminant")]
    NotFundamental(u64),

    /// A character modulus does not split `D` into coprime factors.
    #[error("invalid character modulus {m} for D = {d}: need m | D and gcd(m, D/m) = 1")]
    InvalidCharacterModulus { d: u64, m: u64 },

    /// A matrix that must lie in SL2(Z) has another determinant.
    #[error("matrix must have determinant 1, found {0}")]
    DeterminantNotOne(i64),

    /// A coefficient was requested beyond the stored precision.
    #[error("coefficient index {index} lies beyond the stored precision {precision}")]
    Truncation { index: u64, precision: u64 },

    /// A table entry was requested outside the window it was built on.
    #[error("entry ({u}, {d}) lies outside the table window u ≤ {umax}, d ≤ {dmax}")]
    OutsideWindow { u: u64, d: u64, umax: u64, dmax: u64 },

    /// A numeric series evaluation cannot certify its truncation tail.
    #[error("truncation tail {tail:.3e} exceeds the tolerance {tolerance:.1e}")]
    TailTooLarge { tail: f64, tolerance: f64 },

    /// An eigenvalue needed by a multiplicative extension is missing.
    #[error("no Hecke eigenvalue supplied for the prime {0}")]
    MissingEigenvalue(u64),

    /// Two independent computations of the same quantity disagree.
    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    /// Input data violates a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
