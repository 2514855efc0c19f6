use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("order {0} is not a supported field order (prime, or power of two up to 2^16)")]
    UnsupportedFieldOrder(u64),

    #[error("element {value} out of range for a field of order {q}")]
    ElementOutOfRange { value: u32, q: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix operands live in different fields ({0} vs {1})")]
    FieldMismatch(u32, u32),

    #[error("generator must have {expected} independent rows, got rank {got}")]
    InvalidGenerator { expected: usize, got: usize },

    #[error("code descriptor violates an invariant: {0}")]
    InvalidCode(String),

    #[error("no positive-rate secure code: eavesdropper cut {rho_sz} >= source cut {rho_sd}")]
    InfeasibleRate { rho_sd: u32, rho_sz: u32 },

    #[error("codebook of {cells} cells exceeds the memory budget of {budget}")]
    ResourceBudget { cells: u64, budget: u64 },

    #[error("exact enumeration of {states} states exceeds the cap of {cap}")]
    EnumerationCap { states: u128, cap: u64 },

    #[error("graph has a directed cycle; packet scheduling needs an acyclic topology")]
    UnsupportedTopology,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
