//! Black-Scholes utilities: forward-measure call and digital prices and a
//! bisection implied-volatility inverter.
//!
//! Prices here are undiscounted (forward-measure expectations); discounting
//! is applied by callers where market conventions require it.

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub(crate) fn norm_cdf(x: f64) -> f64 {
    // statrs evaluates via erfc; absolute error stays below 1e-15.
    Normal::standard().cdf(x)
}

/// Undiscounted Black-Scholes call price `F·N(d1) − K·N(d2)`.
///
/// `strike = 0` returns the forward (the payoff degenerates to the asset).
pub fn bs_call(forward: f64, strike: f64, sigma: f64, maturity: f64) -> f64 {
    debug_assert!(forward > 0.0 && sigma > 0.0 && maturity > 0.0 && strike >= 0.0);
    if strike == 0.0 {
        return forward;
    }
    let sd = sigma * maturity.sqrt();
    let d1 = ((forward / strike).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    forward * norm_cdf(d1) - strike * norm_cdf(d2)
}

/// Undiscounted Black-Scholes digital price `N(d2)` (flat volatility, no
/// smile-derivative correction).
pub fn bs_digital(forward: f64, strike: f64, sigma: f64, maturity: f64) -> f64 {
    debug_assert!(forward > 0.0 && sigma > 0.0 && maturity > 0.0);
    if strike <= 0.0 {
        return 1.0;
    }
    let sd = sigma * maturity.sqrt();
    let d2 = ((forward / strike).ln() - 0.5 * sd * sd) / sd;
    norm_cdf(d2)
}

/// Volatility bisection bounds and price tolerance.
const VOL_LO: f64 = 1e-6;
const VOL_HI: f64 = 5.0;
const PRICE_TOL: f64 = 1e-10;

/// Implied volatility of an undiscounted call by bisection on σ ∈ [1e-6, 5].
///
/// Errors with [`Error::OutOfRange`] when the price violates the static
/// bounds `intrinsic < price < forward`.
pub fn implied_vol(price: f64, forward: f64, strike: f64, maturity: f64) -> Result<f64> {
    if strike <= 0.0 {
        return Err(Error::Domain("implied vol needs strike > 0".into()));
    }
    let intrinsic = (forward - strike).max(0.0);
    if price <= intrinsic || price >= forward {
        return Err(Error::OutOfRange(format!(
            "call price {price} outside ({intrinsic}, {forward}) at strike {strike}"
        )));
    }
    let (mut lo, mut hi) = (VOL_LO, VOL_HI);
    if bs_call(forward, strike, lo, maturity) > price {
        return Err(Error::OutOfRange(format!(
            "call price {price} below the σ = {VOL_LO} price at strike {strike}"
        )));
    }
    if bs_call(forward, strike, hi, maturity) < price {
        return Err(Error::OutOfRange(format!(
            "call price {price} above the σ = {VOL_HI} price at strike {strike}"
        )));
    }
    // bs_call is strictly increasing in σ, so the bracket stays valid.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gap = bs_call(forward, strike, mid, maturity) - price;
        if gap.abs() <= PRICE_TOL {
            return Ok(mid);
        }
        if gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
