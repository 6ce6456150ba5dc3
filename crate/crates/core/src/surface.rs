//! Implied-volatility smiles and ATM-anchored surfaces.
//!
//! A calibrated density implies a full call-price curve, hence a Black
//! implied-volatility smile; calibrating one density per maturity from a
//! single at-the-money quote extends the smile to a surface whose only
//! inputs are the forward and the ATM volatilities.

use crate::bs;
use crate::density::Density;
use crate::error::{Error, Result};
use crate::med;
use crate::quotes::MaturitySlice;

/// Implied-volatility surface on a maturity × strike grid; cells are `None`
/// where no Black volatility reproduces the model price.
#[derive(Debug, Clone)]
pub struct VolGrid {
    /// Year-fractions, one per row.
    pub maturities: Vec<f64>,
    /// Strikes, one per column.
    pub strikes: Vec<f64>,
    /// `vols[row][col]` is the Black volatility at `(maturities[row], strikes[col])`.
    pub vols: Vec<Vec<Option<f64>>>,
}

/// Black volatilities implied by `density` at the given strikes. The forward
/// is the zero-strike call; strikes where inversion fails map to `None`.
pub fn smile<D: Density + ?Sized>(density: &D, strikes: &[f64], maturity: f64) -> Vec<Option<f64>> {
    let forward = density.call(0.0);
    strikes
        .iter()
        .map(|&k| bs::implied_vol(density.call(k), forward, k, maturity).ok())
        .collect()
}

/// Default surface grid: 31 strikes log-spaced over moneyness `[0.5, 2]`.
pub fn default_strike_grid(forward: f64) -> Vec<f64> {
    let lo = 0.5f64.ln();
    let hi = 2.0f64.ln();
    (0..31)
        .map(|i| forward * (lo + (hi - lo) * i as f64 / 30.0).exp())
        .collect()
}

/// Surface implied by one ATM quote per maturity: each row calibrates a
/// single-strike density at `K = F` from the Black price at `sigma_atm` and
/// reads the smile off it. `sigma_atm` broadcasts when it has one element.
pub fn atm_surface(
    forward: f64,
    sigma_atm: &[f64],
    maturities: &[f64],
    strike_grid: &[f64],
) -> Result<VolGrid> {
    if !(forward > 0.0) {
        return Err(Error::Domain(format!("forward must be positive, got {forward}")));
    }
    if sigma_atm.len() != 1 && sigma_atm.len() != maturities.len() {
        return Err(Error::Domain(format!(
            "need 1 or {} ATM volatilities, got {}",
            maturities.len(),
            sigma_atm.len()
        )));
    }
    let mut vols = Vec::with_capacity(maturities.len());
    for (row, &t) in maturities.iter().enumerate() {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("maturity must be positive, got {t}")));
        }
        let sigma = sigma_atm[if sigma_atm.len() == 1 { 0 } else { row }];
        let slice = MaturitySlice {
            maturity: t,
            discount_factor: 1.0,
            strikes: vec![0.0, forward],
            calls: vec![forward, bs::bs_call(forward, forward, sigma, t)],
            digitals: vec![1.0, bs::bs_digital(forward, forward, sigma, t)],
        };
        let density = med::calibrate(&slice)?;
        vols.push(smile(&density, strike_grid, t));
    }
    Ok(VolGrid {
        maturities: maturities.to_vec(),
        strikes: strike_grid.to_vec(),
        vols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn atm_slice(maturity: f64) -> MaturitySlice {
        MaturitySlice {
            maturity,
            discount_factor: 1.0,
            strikes: vec![0.0, 100.0],
            calls: vec![100.0, bs::bs_call(100.0, 100.0, 0.25, maturity)],
            digitals: vec![1.0, bs::bs_digital(100.0, 100.0, 0.25, maturity)],
        }
    }

    #[test]
    fn single_atm_strike_smile_at_one_year() {
        let density = med::calibrate(&atm_slice(1.0)).unwrap();
        let strikes: Vec<f64> = (1..=9).map(|i| 20.0 * i as f64).collect();
        let expected = [
            0.6213, 0.4626, 0.3617, 0.2888, 0.2500, 0.2595, 0.2704, 0.2784, 0.2841,
        ];
        let vols = smile(&density, &strikes, 1.0);
        for (v, want) in vols.iter().zip(expected) {
            assert_abs_diff_eq!(v.unwrap(), want, epsilon = 5e-5);
        }
    }

    #[test]
    fn smile_reproduces_the_quoted_volatilities_at_constraint_strikes() {
        let strikes = [60.0, 80.0, 100.0, 120.0, 140.0];
        let quotes: Vec<crate::quotes::RawQuote> = strikes
            .iter()
            .map(|&k| crate::quotes::RawQuote {
                strike: k,
                call_bid: Some(bs::bs_call(100.0, k, 0.25, 1.0)),
                call_ask: Some(bs::bs_call(100.0, k, 0.25, 1.0)),
                digital_bid: Some(bs::bs_digital(100.0, k, 0.25, 1.0)),
                digital_ask: Some(bs::bs_digital(100.0, k, 0.25, 1.0)),
            })
            .collect();
        let slice = crate::quotes::build_slice(&quotes, 1.0, 1.0, Some(100.0)).unwrap();
        let density = med::calibrate(&slice).unwrap();
        for v in smile(&density, &strikes, 1.0) {
            assert_abs_diff_eq!(v.unwrap(), 0.25, epsilon = 1e-6);
        }
    }

    #[test]
    fn atm_surface_row_matches_the_single_slice_smile() {
        let grid: Vec<f64> = (1..=9).map(|i| 20.0 * i as f64).collect();
        let surface = atm_surface(100.0, &[0.25], &[0.25, 0.5, 1.0, 2.0], &grid).unwrap();
        assert_eq!(surface.vols.len(), 4);
        let expected = [
            0.6213, 0.4626, 0.3617, 0.2888, 0.2500, 0.2595, 0.2704, 0.2784, 0.2841,
        ];
        for (v, want) in surface.vols[2].iter().zip(expected) {
            assert_abs_diff_eq!(v.unwrap(), want, epsilon = 5e-5);
        }
        // The ATM column is exact on every row.
        for row in &surface.vols {
            assert_abs_diff_eq!(row[4].unwrap(), 0.25, epsilon = 1e-7);
        }
    }

    #[test]
    fn surface_cells_round_trip_the_model_prices() {
        let grid = default_strike_grid(100.0);
        assert_eq!(grid.len(), 31);
        assert_abs_diff_eq!(grid[0], 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(grid[30], 200.0, epsilon = 1e-9);
        let density = med::calibrate(&atm_slice(0.5)).unwrap();
        for (k, v) in grid.iter().zip(smile(&density, &grid, 0.5)) {
            let vol = v.unwrap();
            let reproduced = bs::bs_call(100.0, *k, vol, 0.5);
            assert_abs_diff_eq!(reproduced, density.call(*k), epsilon = 1e-9);
        }
    }

    #[test]
    fn smile_amplitude_near_the_money_shrinks_with_maturity() {
        let maturities = [0.1, 0.5, 1.0, 2.0, 5.0];
        let grid = default_strike_grid(100.0);
        let surface = atm_surface(100.0, &[0.25], &maturities, &grid).unwrap();
        let mut previous = f64::INFINITY;
        for row in &surface.vols {
            let amplitude = grid
                .iter()
                .zip(row)
                .filter(|(k, _)| (0.8..=1.2).contains(&(*k / 100.0)))
                .map(|(_, v)| (v.unwrap() - 0.25).abs())
                .fold(0.0, f64::max);
            assert!(
                amplitude <= previous + 1e-12,
                "amplitude {amplitude} grew past {previous}"
            );
            previous = amplitude;
        }
    }

    #[test]
    fn unreachable_prices_leave_empty_cells() {
        let density = med::calibrate(&atm_slice(1.0)).unwrap();
        let vols = smile(&density, &[0.0, 100.0], 1.0);
        assert!(vols[0].is_none());
        assert_abs_diff_eq!(vols[1].unwrap(), 0.25, epsilon = 1e-7);
    }

    #[test]
    fn mismatched_atm_vector_is_rejected() {
        let grid = default_strike_grid(100.0);
        let err = atm_surface(100.0, &[0.2, 0.3], &[0.5, 1.0, 2.0], &grid).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
