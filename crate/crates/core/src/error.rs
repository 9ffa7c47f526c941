use thiserror::Error;

/// Errors raised by group construction, validation and the entropy engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("ambient groups differ")]
    AmbientMismatch,

    #[error("modulus {0} out of range (must be 1..=2^31-1)")]
    Modulus(i64),

    #[error("subgroup is not contained in the larger subgroup")]
    NotContained,

    #[error("ill-defined homomorphism: generator {generator} of order {order} maps outside the relation lattice (target coordinate {coordinate})")]
    IllDefinedHom {
        generator: usize,
        order: i64,
        coordinate: usize,
    },

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("group too large: {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("malformed specification: {0}")]
    Spec(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("inconclusive: no certified stabilization within {budget} steps")]
    Inconclusive { budget: usize },

    #[error("endomorphism is not surjective on window {0}")]
    NotSurjective(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
