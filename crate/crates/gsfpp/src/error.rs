use thiserror::Error;

/// Errors produced by schedule construction, series evaluation and the
/// Monte Carlo harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// One or more configuration invariants were violated. All violations
    /// are collected before reporting.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    /// An alternating series failed to meet its tolerance within the
    /// configured truncation index. The achieved bound is reported.
    #[error("series truncation failure: achieved bound {achieved:e} > tol {tol:e} at r_max {r_max}")]
    Truncation {
        achieved: f64,
        tol: f64,
        r_max: usize,
    },

    /// A statistical comparison received degenerate input (for instance
    /// fewer than two pooled bins).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}
