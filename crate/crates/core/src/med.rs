//! Maximum-entropy density calibration.
//!
//! The entropy maximizer under call and digital constraints is piecewise
//! exponential, `g(x) = α_i e^{β_i x}` on each strike bucket
//! `[K_i, K_{i+1})`. Each interior bucket reduces to one strictly monotone
//! 1-D root-find (inverting the function `F` below); the last bucket is in
//! closed form. Buckets are independent, so calibration is linear in the
//! number of strikes.

use crate::error::{Error, Result};
use crate::quotes::MaturitySlice;

/// Exponent magnitudes are clamped here before exponentiation; e^745 is the
/// edge of f64 range.
const EXP_CLAMP: f64 = 745.0;

/// Below this |x| the Taylor branches of `f_standard`/`f_prime` take over to
/// avoid cancellation in `e^x/(e^x − 1) − 1/x`.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Newton tolerance on `|F(x) − λ|`.
const INVERT_TOL: f64 = 1e-13;

/// Bisection interval width tolerance for the fallback.
const BISECT_TOL: f64 = 1e-12;

/// One exponential piece of the density on `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketParams {
    /// Lower strike boundary.
    pub lower: f64,
    /// Upper strike boundary; `f64::INFINITY` for the tail bucket.
    pub upper: f64,
    /// Density scale `α_i > 0`.
    pub alpha: f64,
    /// Exponent slope `β_i` per currency unit; negative on the tail.
    pub beta: f64,
}

/// A calibrated maximum-entropy density: contiguous exponential buckets
/// covering `[0, ∞)` plus the constraint data they were fitted to.
#[derive(Debug, Clone, PartialEq)]
pub struct MedDensity {
    /// Strikes `K_0 = 0 < … < K_n`.
    pub strikes: Vec<f64>,
    /// Undiscounted calls at the strikes; `C̃_0` is the forward.
    pub calls: Vec<f64>,
    /// Undiscounted digitals at the strikes; `D̃_0 = 1`.
    pub digitals: Vec<f64>,
    /// One exponential piece per bucket, tail included.
    pub buckets: Vec<BucketParams>,
}

/// The strictly increasing map `F(x) = e^x/(e^x − 1) − 1/x`, extended
/// continuously by `F(0) = 1/2`; limits 0 at −∞ and 1 at +∞.
///
/// Its inverse turns each bucket's mean constraint into the exponent slope.
pub fn f_standard(x: f64) -> f64 {
    let x = x.clamp(-EXP_CLAMP, EXP_CLAMP);
    if x.abs() < SERIES_THRESHOLD {
        return 0.5 + x / 12.0 - x * x * x / 720.0;
    }
    if x > 0.0 {
        // 1/(1 − e^{−x}) − 1/x keeps both terms bounded for large x.
        1.0 / -(-x).exp_m1() - 1.0 / x
    } else {
        x.exp() / x.exp_m1() - 1.0 / x
    }
}

/// Derivative `F′(x) = 1/x² − e^x/(e^x − 1)²`, with the even-series branch
/// `1/12 − x²/240` near zero; strictly positive everywhere.
pub fn f_prime(x: f64) -> f64 {
    let x = x.clamp(-EXP_CLAMP, EXP_CLAMP);
    if x.abs() < SERIES_THRESHOLD {
        return 1.0 / 12.0 - x * x / 240.0;
    }
    // e^x/(e^x−1)² = 1/(4 sinh²(x/2)) is symmetric and overflow-safe here.
    let s = (0.5 * x).sinh();
    1.0 / (x * x) - 1.0 / (4.0 * s * s)
}

/// Invert `F`: the `x` with `F(x) = lambda`, found by Newton from 0 with a
/// maintained bracket and bisection fallback.
///
/// Errors with [`Error::Domain`] for `lambda` outside (0, 1).
pub fn invert_f(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("F inversion needs λ in (0,1), got {lambda}")));
    }
    // Expand a bracket around 0; F is increasing with limits 0 and 1.
    let mut lo = -1.0;
    let mut hi = 1.0;
    while f_standard(lo) > lambda {
        lo *= 2.0;
    }
    while f_standard(hi) < lambda {
        hi *= 2.0;
    }
    let mut x = 0.0;
    for _ in 0..100 {
        let gap = f_standard(x) - lambda;
        if gap.abs() <= INVERT_TOL {
            return Ok(x);
        }
        if gap > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = gap / f_prime(x);
        let candidate = x - step;
        // Newton must stay inside the bracket to keep global convergence.
        x = if candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
    }
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if f_standard(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solve interior bucket `i < n`: exponent from the inverted mean constraint,
/// scale from the mass constraint.
///
/// Errors with [`Error::Arbitrage`] when the bucket mean leaves its interval.
pub fn solve_bucket(slice: &MaturitySlice, i: usize) -> Result<BucketParams> {
    debug_assert!(i < slice.last());
    let lower = slice.strikes[i];
    let upper = slice.strikes[i + 1];
    let width = upper - lower;
    let mass = slice.bucket_mass(i);
    let kbar = slice.bucket_mean(i);
    let lambda = (kbar - lower) / width;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Arbitrage {
            bucket: i,
            detail: format!("bucket mean {kbar} outside ({lower}, {upper})"),
        });
    }
    let x = invert_f(lambda).map_err(|_| Error::Arbitrage {
        bucket: i,
        detail: format!("bucket mean {kbar} outside ({lower}, {upper})"),
    })?;
    let beta = x / width;
    // α from the mass constraint: ∫ α e^{βx} over the bucket equals m_i.
    let alpha = if x.abs() < 1e-9 {
        mass / width
    } else {
        beta * mass * (-beta * lower).exp() / (beta * width).exp_m1()
    };
    Ok(BucketParams {
        lower,
        upper,
        alpha,
        beta,
    })
}

/// Solve the tail bucket in closed form: `β_n = −D̃_n/C̃_n`,
/// `α_n = −β_n·D̃_n·e^{−β_n K_n}`.
pub fn solve_last_bucket(slice: &MaturitySlice) -> Result<BucketParams> {
    let n = slice.last();
    let (k, c, d) = (slice.strikes[n], slice.calls[n], slice.digitals[n]);
    if c <= 0.0 || d <= 0.0 {
        return Err(Error::Arbitrage {
            bucket: n,
            detail: format!("tail needs positive prices, got call {c}, digital {d}"),
        });
    }
    let beta = -d / c;
    let alpha = -beta * d * (-beta * k).exp();
    Ok(BucketParams {
        lower: k,
        upper: f64::INFINITY,
        alpha,
        beta,
    })
}

/// Calibrate the full density: every interior bucket plus the closed-form
/// tail. The result satisfies all mass and moment constraints to solver
/// tolerance (see the constraint-residual tests).
pub fn calibrate(slice: &MaturitySlice) -> Result<MedDensity> {
    let n = slice.last();
    let mut buckets = Vec::with_capacity(n + 1);
    for i in 0..n {
        buckets.push(solve_bucket(slice, i)?);
    }
    buckets.push(solve_last_bucket(slice)?);
    Ok(MedDensity {
        strikes: slice.strikes.clone(),
        calls: slice.calls.clone(),
        digitals: slice.digitals.clone(),
        buckets,
    })
}

impl MedDensity {
    /// Number of quoted strikes (excluding the synthetic strike 0).
    pub fn n_strikes(&self) -> usize {
        self.strikes.len() - 1
    }

    /// Bucket mass `m_i` implied by the constraints.
    pub fn bucket_mass(&self, i: usize) -> f64 {
        if i + 1 == self.strikes.len() {
            self.digitals[i]
        } else {
            self.digitals[i] - self.digitals[i + 1]
        }
    }

    /// Bucket first moment `s_i` implied by the constraints.
    pub fn bucket_moment(&self, i: usize) -> f64 {
        let lhs = self.calls[i] + self.strikes[i] * self.digitals[i];
        if i + 1 == self.strikes.len() {
            lhs
        } else {
            lhs - (self.calls[i + 1] + self.strikes[i + 1] * self.digitals[i + 1])
        }
    }

    /// Boltzmann-Shannon entropy `−∫ g ln g` in closed form,
    /// `Σ_i (−m_i ln α_i − β_i s_i)`.
    pub fn entropy(&self) -> f64 {
        (0..self.buckets.len())
            .map(|i| entropy_term(self.bucket_mass(i), self.bucket_moment(i), &self.buckets[i]))
            .sum()
    }
}

/// Entropy contribution of one bucket with mass `m` and first moment `s`.
pub(crate) fn entropy_term(m: f64, s: f64, bucket: &BucketParams) -> f64 {
    -m * bucket.alpha.ln() - bucket.beta * s
}
