// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("composite modulus q={0}")]
    CompositeModulus(u64),

    #[error("modulus q={0} is below 2")]
    ModulusTooSmall(u64),

    #[error("prime too small: q={q} must exceed network size N={n}")]
    PrimeTooSmall { q: u64, n: usize },

    #[error("element {value} is not invertible mod {q}")]
    NotInvertible { value: u64, q: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u64),

    #[error("duplicate compromised node {0}")]
    DuplicateNode(usize),

    #[error("hadamard order {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("column {col} out of range 1..={order}")]
    ColumnOutOfRange { col: usize, order: usize },

    #[error("node {id} out of range 1..={n}")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("secret matrix is not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("enumeration too large: {0} candidate secrets exceed the 10^7 bound")]
    EnumerationTooLarge(u128),

    #[error("malformed document: {0}")]
    Document(String),

    #[error("io: {0}")]
    Io(String),

    #[error("asymmetric key for pair ({i},{j}): {forward} != {backward}")]
    AsymmetricKey {
        i: usize,
        j: usize,
        forward: u64,
        backward: u64,
    },

    #[error("inconsistent constraint system: compromised shares admit no symmetric secret")]
    InconsistentSystem,

    #[error("share {index} does not match (S*P)^T")]
    ShareMismatch { index: usize },
}

impl Error {
    /// True for failures that indicate broken invariants rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::AsymmetricKey { .. } | Error::InconsistentSystem | Error::ShareMismatch { .. }
        )
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        if self.is_internal() {
            3
        } else {
            2
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Document(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
