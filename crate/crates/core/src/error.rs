use thiserror::Error;

/// Error kinds shared by all modules. Failures of verified congruences are
/// never errors; they are reported as data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("matrix determinant is not a unit modulo p: {0}")]
    NonUnitDeterminant(String),

    #[error("polytope is unbounded: {0}")]
    UnboundedPolytope(String),

    #[error("coefficient at the distinguished exponent is not a unit: {0}")]
    NonUnitVertexCoefficient(String),

    #[error("fiber is non-ordinary (truncated period / Hasse-Witt vanishes mod p): {0}")]
    NonOrdinary(String),

    #[error("supersingular point: p divides the Frobenius trace ({0})")]
    Supersingular(String),

    #[error("finite field exceeds the configured enumeration budget: {0}")]
    FieldTooLarge(String),

    #[error("ambient toric variety not supported: {0}")]
    UnsupportedAmbient(String),

    #[error("pullback is not a Laurent polynomial: {0}")]
    NonLaurentResult(String),

    #[error("term budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("coefficient is not a Teichmuller lift: {0}")]
    NotTeichmuller(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
