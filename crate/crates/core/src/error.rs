use thiserror::Error;

use crate::complex::EdgePath;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime in [2, 65536]")]
    NotPrime(u64),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("path step {step} is not incident to the current vertex")]
    InvalidPath { step: usize },

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("cochain is not a cocycle: nonzero on the boundary of face {face}")]
    NotCocycle { face: usize },

    #[error("classes are dependent in H^1; combination {combination:?} is trivial, cover would be disconnected")]
    DependentClasses { combination: Vec<u32> },

    #[error("homomorphism to Z/{order} is not surjective (gcd of loop values is {gcd}), cover would be disconnected")]
    NotSurjective { order: u64, gcd: u64 },

    #[error("weights evaluate to {value} on face {face}, not an integer cocycle")]
    NotIntegerCocycle { face: usize, value: i64 },

    #[error("c-value is not well defined: evaluates to {value} on a loop of the cover")]
    NotConstantOnFiber { value: u32, witness: EdgePath },

    #[error("operation needs an elementary abelian p-cover")]
    UnsupportedCover,

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("enumeration refused: {count} elements exceed the cap {cap}")]
    EnumerationRefused { count: u128, cap: u128 },

    #[error("exact mode unavailable: {0}")]
    Mode(String),

    #[error("class is trivial in H^1")]
    TrivialClass,

    #[error("graph is disconnected")]
    DisconnectedGraph,

    #[error("graph is too small for a Cheeger cut")]
    EmptyGraph,

    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u32, u32),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("series is not rapidly descending on the prefix (lambda estimate {lambda})")]
    NotRapidlyDescending { lambda: String },

    #[error("malformed tower: {0}")]
    MalformedTower(String),

    #[error("homomorphism is zero")]
    ZeroHomomorphism,

    #[error("not {k}-quasi-additive: |f({sum}) - f({i}) - f({j})| = {gap}")]
    NotQuasiAdditive { k: u64, i: u64, j: u64, sum: i64, gap: i64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}
