//! Maximum-entropy risk-neutral densities from option quotes.
//!
//! Given undiscounted call and digital prices at a ladder of strikes, the
//! entropy-maximizing density consistent with those prices is piecewise
//! exponential and solvable bucket by bucket ([`med`]). The calibrated
//! density prices calls, digitals, and deltas in closed form and admits an
//! analytic inverse CDF for sampling ([`density`]). Two further calibration
//! modes cover markets without digital quotes ([`bk`], calls only via a
//! global Newton iteration) and calibration relative to a prior density
//! ([`mred`], minimum relative entropy). [`surface`] turns calibrated
//! densities into implied-volatility smiles and surfaces via [`bs`].

// Validation uses `!(x > 0.0)` so that NaN fails alongside nonpositives;
// the suggested `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bk;
pub mod bs;
pub mod density;
pub mod error;
pub mod med;
pub mod mred;
pub mod quad;
pub mod quotes;
pub mod surface;

pub use bk::BkDensity;
pub use density::Density;
pub use error::{Error, Result};
pub use med::{BucketParams, MedDensity};
pub use mred::{MredDensity, Prior};
pub use quotes::{build_slice, read_quote_file, MaturitySlice, RawQuote};
