//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between a quote file and a calibrated density.
#[derive(Debug, Error)]
pub enum Error {
    /// No forward was supplied and the quote set has no strike-zero row to infer it from.
    #[error("no forward available: pass one explicitly or include a strike-0 quote")]
    MissingForward,

    /// The slice failed one or more no-arbitrage / shape checks.
    #[error("quote validation failed:\n{}", violations.join("\n"))]
    Validation { violations: Vec<String> },

    /// A bucket's mean-price ratio left its open interval, so no density exists.
    #[error("arbitrage in bucket {bucket}: {detail}")]
    Arbitrage { bucket: usize, detail: String },

    /// An argument left the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The exponent slope of the tail is nonnegative, so the density has infinite mass.
    #[error("multipliers not integrable: tail slope must be negative")]
    Integrability,

    /// An iterative solver ran out of iterations.
    #[error("{context} did not converge (best residual {residual:.3e})")]
    NonConvergence {
        context: &'static str,
        residual: f64,
    },

    /// A price violates its static no-arbitrage bounds, e.g. when inverting a volatility.
    #[error("price out of range: {0}")]
    OutOfRange(String),

    /// A call-spread digital was requested at a strike without neighbours on both sides.
    #[error("strike {strike} has no quoted neighbour on both sides")]
    BoundaryStrike { strike: f64 },

    /// Malformed input data.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
