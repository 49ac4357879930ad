use thiserror::Error;

/// Errors shared by all modules. Display messages name the violated
/// precondition so a CLI can surface them verbatim.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or operation received parameters outside its contract.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A hard resource cap was exceeded (enumeration size, matrix range,
    /// sweep budget, expansion budget).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A mathematical domain restriction was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched dimensions between a path and a specification.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Mutually inconsistent inputs (e.g. non-nested interaction sets).
    #[error("contract violation: {0}")]
    Contract(String),

    /// NaN energies, drift-guard failures, or other numeric anomalies.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
