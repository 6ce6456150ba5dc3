//! Pricing, distribution functions, and sampling for piecewise-exponential
//! densities.
//!
//! Everything here is closed form: calls, digitals, the CDF, its inverse,
//! and spot deltas all reduce to per-bucket exponentials, so no quadrature
//! is involved. Sampling is inverse-transform with a counter-based RNG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bk::BkDensity;
use crate::error::{Error, Result};
use crate::med::{BucketParams, MedDensity};

/// Relative exponent size below which per-bucket formulas switch to their
/// series branches (the `β → 0` limits).
const FLAT_THRESHOLD: f64 = 1e-9;

/// Series threshold for the call primitive `expm1(z) − z`.
const CALL_SERIES_THRESHOLD: f64 = 1e-4;

/// A risk-neutral density with closed-form prices and distribution
/// functions on `[0, ∞)`.
pub trait Density {
    /// Density value `g(x)`; zero for negative `x`.
    fn pdf(&self, x: f64) -> f64;

    /// Undiscounted digital price `D̃(K) = ∫_K^∞ g`.
    fn digital(&self, strike: f64) -> f64;

    /// Undiscounted call price `C̃(K) = ∫_K^∞ (x − K) g(x) dx`.
    fn call(&self, strike: f64) -> f64;

    /// CDF `G(x) = 1 − D̃(x)`.
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.digital(x)
    }

    /// Inverse CDF: the `x` with `G(x) = level`, for `level` in (0, 1).
    fn inverse_cdf(&self, level: f64) -> Result<f64>;

    /// Black-Scholes spot delta of the call at `strike`, for spot
    /// `S = DF · F` and discount factor `df`.
    fn delta(&self, strike: f64, df: f64) -> f64;

    /// Draw `n` samples by inverse transform from a seeded ChaCha12 stream;
    /// identical `(seed, n)` always yields the identical sample.
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                // random::<f64>() is uniform on [0, 1); the inverse CDF
                // accepts that half-open range.
                let u: f64 = rng.random();
                self.inverse_cdf(u.max(f64::MIN_POSITIVE))
                    .expect("uniform level is interior")
            })
            .collect()
    }
}

/// Index of the bucket containing `x`: buckets are right-open `[K_i, K_{i+1})`
/// and the tail is `[K_n, ∞)`.
pub(crate) fn bucket_index(strikes: &[f64], x: f64) -> usize {
    debug_assert!(x >= strikes[0]);
    match strikes.binary_search_by(|k| k.partial_cmp(&x).expect("finite strikes")) {
        Ok(i) => i,
        Err(i) => i - 1,
    }
}

/// Whether the bucket's exponent is numerically flat over its width.
fn is_flat(b: &BucketParams) -> bool {
    let width = if b.upper.is_finite() {
        b.upper - b.lower
    } else {
        1.0
    };
    (b.beta * width).abs() < FLAT_THRESHOLD
}

/// Shared closed-form engine over the bucket decomposition. The three
/// calibrated types delegate to this with their own bucket lists.
pub(crate) struct PiecewiseExponential<'a> {
    pub strikes: &'a [f64],
    pub calls: &'a [f64],
    pub digitals: &'a [f64],
    pub buckets: &'a [BucketParams],
}

impl PiecewiseExponential<'_> {
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.strikes[0] {
            return 0.0;
        }
        let b = &self.buckets[bucket_index(self.strikes, x)];
        b.alpha * (b.beta * x).exp()
    }

    pub fn digital(&self, strike: f64) -> f64 {
        if strike <= self.strikes[0] {
            return self.digitals[0];
        }
        let i = bucket_index(self.strikes, strike);
        let b = &self.buckets[i];
        let partial = if is_flat(b) {
            b.alpha * (strike - b.lower)
        } else {
            // ∫_{K_i}^{K} α e^{βx} dx without cancellation for small β.
            b.alpha / b.beta * (b.beta * b.lower).exp() * (b.beta * (strike - b.lower)).exp_m1()
        };
        self.digitals[i] - partial
    }

    pub fn call(&self, strike: f64) -> f64 {
        if strike <= self.strikes[0] {
            // For K below the support, C̃(K) = C̃(K_0) + (K_0 − K) D̃_0.
            return self.calls[0] + (self.strikes[0] - strike) * self.digitals[0];
        }
        let i = bucket_index(self.strikes, strike);
        let b = &self.buckets[i];
        let u = strike - b.lower;
        // C̃(K) = C̃_i − u·D̃_i + α e^{βK_i} (expm1(βu) − βu)/β².
        let tail = if is_flat(b) {
            0.5 * b.alpha * u * u
        } else {
            let z = b.beta * u;
            let core = if z.abs() < CALL_SERIES_THRESHOLD {
                // expm1(z) − z = z²/2 (1 + z/3 + z²/12 + …).
                0.5 * z * z * (1.0 + z / 3.0 + z * z / 12.0)
            } else {
                z.exp_m1() - z
            };
            b.alpha * (b.beta * b.lower).exp() * core / (b.beta * b.beta)
        };
        self.calls[i] - u * self.digitals[i] + tail
    }

    pub fn inverse_cdf(&self, level: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&level) || (level == 0.0 && self.digitals[0] < 1.0) {
            return Err(Error::OutOfRange(format!(
                "inverse CDF needs a level in [0,1) within the covered mass, got {level}"
            )));
        }
        let survival = 1.0 - level;
        // Find the bucket with D̃_{i+1} < survival ≤ D̃_i.
        let i = self
            .digitals
            .iter()
            .rposition(|&d| d >= survival)
            .ok_or_else(|| {
                Error::OutOfRange(format!("level {level} below the density's support"))
            })?;
        let b = &self.buckets[i];
        let drop = self.digitals[i] - survival;
        if is_flat(b) {
            return Ok(b.lower + drop / b.alpha);
        }
        // Invert D̃_i − (α/β) e^{βK_i} expm1(β(x − K_i)) = survival for x.
        let x = b.lower + (b.beta * drop / (b.alpha * (b.beta * b.lower).exp())).ln_1p() / b.beta;
        Ok(x)
    }

    pub fn delta(&self, strike: f64, df: f64) -> f64 {
        let spot = df * self.calls[0];
        if strike <= self.strikes[0] {
            return df * (self.call(strike) + strike * self.digital(strike)) / spot;
        }
        let i = bucket_index(self.strikes, strike);
        let b = &self.buckets[i];
        let base = self.calls[i] + b.lower * self.digitals[i];
        // Δ = (DF/S) (C̃_i + K_i D̃_i − ∫_{K_i}^{K} x g(x) dx), closed form.
        let partial_moment = if is_flat(b) {
            0.5 * b.alpha * (strike * strike - b.lower * b.lower)
        } else {
            let (ek, eki) = ((b.beta * strike).exp(), (b.beta * b.lower).exp());
            b.alpha / b.beta * (strike * ek - b.lower * eki)
                - b.alpha / (b.beta * b.beta) * (ek - eki)
        };
        df * (base - partial_moment) / spot
    }
}

macro_rules! delegate_density {
    ($ty:ty) => {
        impl Density for $ty {
            fn pdf(&self, x: f64) -> f64 {
                self.engine().pdf(x)
            }
            fn digital(&self, strike: f64) -> f64 {
                self.engine().digital(strike)
            }
            fn call(&self, strike: f64) -> f64 {
                self.engine().call(strike)
            }
            fn inverse_cdf(&self, level: f64) -> Result<f64> {
                self.engine().inverse_cdf(level)
            }
            fn delta(&self, strike: f64, df: f64) -> f64 {
                self.engine().delta(strike, df)
            }
        }
    };
}

impl MedDensity {
    pub(crate) fn engine(&self) -> PiecewiseExponential<'_> {
        PiecewiseExponential {
            strikes: &self.strikes,
            calls: &self.calls,
            digitals: &self.digitals,
            buckets: &self.buckets,
        }
    }
}

impl BkDensity {
    pub(crate) fn engine(&self) -> PiecewiseExponential<'_> {
        PiecewiseExponential {
            strikes: &self.strikes,
            calls: &self.calls,
            digitals: &self.digitals,
            buckets: &self.buckets,
        }
    }
}

delegate_density!(MedDensity);
delegate_density!(BkDensity);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bs::{bs_call, bs_digital};
    use crate::med::calibrate;
    use crate::quotes::{build_slice, RawQuote};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn flat_slice(strikes: &[f64]) -> crate::quotes::MaturitySlice {
        let quotes: Vec<RawQuote> = strikes
            .iter()
            .map(|&k| RawQuote {
                strike: k,
                call_bid: Some(bs_call(100.0, k, 0.25, 1.0)),
                call_ask: Some(bs_call(100.0, k, 0.25, 1.0)),
                digital_bid: Some(bs_digital(100.0, k, 0.25, 1.0)),
                digital_ask: Some(bs_digital(100.0, k, 0.25, 1.0)),
            })
            .collect();
        build_slice(&quotes, 1.0, 1.0, Some(100.0)).unwrap()
    }

    #[test]
    fn cdf_is_small_deep_in_the_left_tail() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        assert_abs_diff_eq!(med.cdf(10.0), 1.8e-3, epsilon = 1e-4);
        assert_eq!(med.cdf(-5.0), 0.0);
        assert_eq!(med.pdf(-5.0), 0.0);
    }

    #[test]
    fn cdf_matches_digitals_at_strikes() {
        let slice = flat_slice(&[60.0, 80.0, 100.0, 120.0, 140.0]);
        let med = calibrate(&slice).unwrap();
        for (k, d) in slice.strikes.iter().zip(&slice.digitals) {
            assert_abs_diff_eq!(med.cdf(*k), 1.0 - d, epsilon = 1e-12);
        }
    }

    #[test]
    fn prices_reproduce_inputs_at_strikes() {
        let slice = flat_slice(&[60.0, 80.0, 100.0, 120.0, 140.0]);
        let med = calibrate(&slice).unwrap();
        for i in 0..slice.strikes.len() {
            assert_relative_eq!(med.call(slice.strikes[i]), slice.calls[i], max_relative = 1e-12);
            assert_relative_eq!(
                med.digital(slice.strikes[i]),
                slice.digitals[i],
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn single_strike_digital_at_120() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        assert_abs_diff_eq!(med.digital(120.0), 0.1821, epsilon = 5e-5);
    }

    #[test]
    fn three_strike_digital_at_160() {
        let med = calibrate(&flat_slice(&[60.0, 100.0, 140.0])).unwrap();
        assert_abs_diff_eq!(med.digital(160.0), 0.0221, epsilon = 5e-5);
    }

    #[test]
    fn single_strike_call_at_120() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        assert_abs_diff_eq!(med.call(120.0), 4.0232, epsilon = 5e-5);
    }

    #[test]
    fn five_strike_call_at_40() {
        let med = calibrate(&flat_slice(&[60.0, 80.0, 100.0, 120.0, 140.0])).unwrap();
        assert_abs_diff_eq!(med.call(40.0), 60.0033, epsilon = 5e-5);
    }

    #[test]
    fn call_below_support_is_forward_minus_strike() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        assert_abs_diff_eq!(med.call(0.0), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(med.call(-10.0), 110.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_cdf_median_of_single_strike_density() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        // The strike carries CDF 1 − D̃(100), reproduced by the calibration.
        let level = 1.0 - bs_digital(100.0, 100.0, 0.25, 1.0);
        let x = med.inverse_cdf(level).unwrap();
        assert_abs_diff_eq!(x, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn inverse_cdf_round_trips_through_cdf() {
        let med = calibrate(&flat_slice(&[60.0, 100.0, 140.0])).unwrap();
        for i in 0..1000 {
            let level = (i as f64 + 0.5) / 1000.0;
            let x = med.inverse_cdf(level).unwrap();
            assert_abs_diff_eq!(med.cdf(x), level, epsilon = 1e-10);
        }
    }

    #[test]
    fn inverse_cdf_rejects_exterior_levels() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        assert!(med.inverse_cdf(1.0).is_err());
        assert!(med.inverse_cdf(-0.1).is_err());
        assert!(med.inverse_cdf(1.5).is_err());
    }

    #[test]
    fn delta_at_zero_strike_is_discounted_forward_over_spot() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        let df = 0.97;
        // S = DF·F, so Δ(0) = DF·(C̃(0) + 0)/S = DF·F/S = 1.
        assert_abs_diff_eq!(med.delta(0.0, df), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn delta_matches_price_identity() {
        let med = calibrate(&flat_slice(&[60.0, 100.0, 140.0])).unwrap();
        let df = 0.95;
        let spot = df * 100.0;
        for &k in &[10.0, 59.0, 60.0, 95.0, 100.0, 130.0, 170.0, 400.0] {
            let lhs = spot * med.delta(k, df);
            let rhs = df * (med.call(k) + k * med.digital(k));
            // Deep-tail values are tiny differences of O(1) terms, so allow
            // a few ulps of absolute slack besides the relative bound.
            assert_relative_eq!(lhs, rhs, max_relative = 1e-11, epsilon = 1e-13);
        }
    }

    #[test]
    fn delta_is_decreasing_in_strike() {
        let med = calibrate(&flat_slice(&[60.0, 80.0, 100.0, 120.0, 140.0])).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let k = i as f64;
            let d = med.delta(k, 0.99);
            assert!(d <= prev + 1e-12, "delta rose at K={k}");
            prev = d;
        }
    }

    #[test]
    fn sample_mean_and_median_match_the_density() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        let draws = med.sample(1_000_000, 7);
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert_abs_diff_eq!(mean, 100.0, epsilon = 0.2);
        let below = draws.iter().filter(|&&x| x <= 100.0).count() as f64;
        assert_abs_diff_eq!(below / draws.len() as f64, 0.5497, epsilon = 2e-3);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let med = calibrate(&flat_slice(&[100.0])).unwrap();
        assert_eq!(med.sample(100, 42), med.sample(100, 42));
        assert_ne!(med.sample(100, 42), med.sample(100, 43));
    }

    #[test]
    fn kolmogorov_smirnov_statistic_is_below_critical() {
        let med = calibrate(&flat_slice(&[60.0, 100.0, 140.0])).unwrap();
        let n = 100_000;
        let mut draws = med.sample(n, 2024);
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, x) in draws.iter().enumerate() {
            let g = med.cdf(*x);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((g - lo).abs()).max((g - hi).abs());
        }
        // 1% critical value of the one-sample KS statistic.
        let critical = 1.62762 / (n as f64).sqrt();
        assert!(ks < critical, "KS {ks} ≥ {critical}");
    }
}
