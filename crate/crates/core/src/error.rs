use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A construction regime was requested outside its admissible parameter range.
    /// The message names the violated condition.
    #[error("admissibility violated: {condition}")]
    Admissibility { condition: String },

    /// A schedule came out ill-posed (no layers, or the boundary layer too tall).
    #[error("construction infeasible: {0}")]
    Infeasible(String),

    #[error("cell kind mismatch: expected {expected} cell")]
    CellKind { expected: &'static str },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("glue mismatch between node {first} and node {second}: {what}")]
    GlueMismatch {
        first: usize,
        second: usize,
        what: String,
    },

    #[error("conservation violated at node {node}: inflow {inflow:e}, outflow {outflow:e}")]
    Conservation {
        node: usize,
        inflow: f64,
        outflow: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mass mismatch: {0}")]
    MassMismatch(String),

    #[error(
        "cell budget exceeded: {needed} cells requested, budget {budget}; use the analytic path"
    )]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
