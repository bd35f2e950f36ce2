use thiserror::Error;

/// Errors produced by the solvers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid assortment: product {index} out of range for {n} products")]
    InvalidAssortment { index: usize, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance too large for exhaustive search: {size} candidates exceed the limit of {limit}")]
    TooLarge { size: u128, limit: u128 },

    #[error("instance is infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("guess budget exceeded: {guesses} guesses > budget {budget}")]
    BudgetExceeded { guesses: u128, budget: u128 },

    #[error("malformed linear program: {0}")]
    LpModel(String),

    #[error("plan extraction failed: {0}")]
    Extraction(String),

    #[error("malformed bipartite graph: {0}")]
    Structure(String),

    #[error("cannot increase visibility of product {product}: already shown to every customer")]
    CannotIncrease { product: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("rounded plan violates a constraint: {0}")]
    RoundingViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
