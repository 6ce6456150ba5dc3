//! Minimum relative-entropy calibration against a prior density.
//!
//! The I-divergence minimizer under call and digital constraints is a
//! per-bucket exponential tilt of the prior, `h(x) = γ_i e^{δ_i x} p(x)` on
//! `[K_i, K_{i+1})`. For a log-normal prior each bucket needs numerical
//! integration and a two-dimensional root-finder; when the prior is itself
//! piecewise exponential the tilted density stays piecewise exponential and
//! everything is solved in closed form (after refining buckets to the union
//! of both boundary grids).

use crate::bk::{interval_moment, tail_moment};
use crate::bs;
use crate::density::{bucket_index, Density};
use crate::error::{Error, Result};
use crate::med::{BucketParams, MedDensity};
use crate::quad;
use crate::quotes::MaturitySlice;

/// Relative tolerance per quadrature call.
const QUAD_TOL: f64 = 1e-10;

/// Relative tolerance on bucket mass and first-moment residuals.
const NEWTON_TOL: f64 = 1e-9;

/// Newton iteration and step-halving caps.
const MAX_OUTER: usize = 80;
const MAX_HALVINGS: usize = 40;

/// How many standard deviations of log-normal tail the default truncation
/// keeps; `F·exp(10σ√T)` leaves ~1e-23 of prior mass outside.
const TRUNCATION_SIGMAS: f64 = 10.0;

/// A prior density on `(0, ∞)` with unit mass.
#[derive(Debug, Clone)]
pub enum Prior {
    /// Zero-drift log-normal: the Black-Scholes terminal density with the
    /// given forward, volatility, and year-fraction.
    LogNormal {
        /// Forward `F > 0`.
        forward: f64,
        /// Annualized volatility `σ > 0`.
        sigma: f64,
        /// Year-fraction `T > 0`.
        maturity: f64,
    },
    /// Piecewise-exponential prior, e.g. a previously calibrated density.
    Med(MedDensity),
}

impl Prior {
    /// Density value `p(x)`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    /// `ln p(x)`; `−∞` outside the support. Used directly so that deep-tail
    /// integrands underflow gracefully instead of forming `0/0`.
    pub fn log_pdf(&self, x: f64) -> f64 {
        match self {
            Prior::LogNormal {
                forward,
                sigma,
                maturity,
            } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let var = sigma * sigma * maturity;
                let z = (x / forward).ln() + 0.5 * var;
                -0.5 * z * z / var - (x * sigma * (2.0 * std::f64::consts::PI * maturity).sqrt()).ln()
            }
            Prior::Med(med) => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                let b = &med.buckets[bucket_index(&med.strikes, x)];
                b.alpha.ln() + b.beta * x
            }
        }
    }

    /// Prior mass of `[lo, hi)` in closed form.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Prior::LogNormal {
                forward,
                sigma,
                maturity,
            } => {
                let upper = if hi.is_finite() {
                    bs::bs_digital(*forward, hi, *sigma, *maturity)
                } else {
                    0.0
                };
                bs::bs_digital(*forward, lo.max(0.0), *sigma, *maturity) - upper
            }
            Prior::Med(med) => {
                let upper = if hi.is_finite() { med.digital(hi) } else { 0.0 };
                med.digital(lo.max(0.0)) - upper
            }
        }
    }

    /// Default upper integration limit: finite only where quadrature is
    /// involved (log-normal priors); piecewise-exponential priors integrate
    /// to infinity analytically.
    pub fn default_truncation(&self) -> f64 {
        match self {
            Prior::LogNormal {
                forward,
                sigma,
                maturity,
            } => forward * (TRUNCATION_SIGMAS * sigma * maturity.sqrt()).exp(),
            Prior::Med(_) => f64::INFINITY,
        }
    }
}

/// A calibrated minimum relative-entropy density.
#[derive(Debug, Clone)]
pub struct MredDensity {
    /// Constraint strikes `K_0 = 0 < … < K_n`.
    pub strikes: Vec<f64>,
    /// Undiscounted call constraints; `C̃_0` is the forward.
    pub calls: Vec<f64>,
    /// Undiscounted digital constraints; `D̃_0 = 1`.
    pub digitals: Vec<f64>,
    /// Tilt-bucket lower bounds: the constraint strikes, refined to the
    /// boundary union for piecewise-exponential priors.
    pub bounds: Vec<f64>,
    /// Tilt scales `γ_i > 0`, one per bound.
    pub gammas: Vec<f64>,
    /// Tilt exponents `δ_i`, one per bound.
    pub deltas: Vec<f64>,
    /// The prior that was tilted.
    pub prior: Prior,
    /// Upper support bound used for quadrature (infinite for MED priors).
    pub truncation: f64,
    /// Closed-form equivalent when the prior is piecewise exponential.
    combined: Option<MedDensity>,
}

/// Calibrate the tilt of `prior` to the slice constraints, choosing the
/// analytic path for piecewise-exponential priors and quadrature plus a
/// per-bucket 2-D Newton otherwise.
pub fn calibrate(slice: &MaturitySlice, prior: Prior) -> Result<MredDensity> {
    match prior {
        Prior::Med(med) => calibrate_med_prior(slice, &med),
        other => {
            let truncation = other.default_truncation();
            calibrate_truncated(slice, other, truncation)
        }
    }
}

/// Quadrature calibration with an explicit truncation bound (the density is
/// treated as supported on `[0, truncation)`).
pub fn calibrate_truncated(
    slice: &MaturitySlice,
    prior: Prior,
    truncation: f64,
) -> Result<MredDensity> {
    if !(truncation > slice.strikes[slice.last()]) {
        return Err(Error::Domain(format!(
            "truncation {truncation} does not cover the last strike"
        )));
    }
    let n = slice.last();
    let mut gammas = Vec::with_capacity(n + 1);
    let mut deltas = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let lo = slice.strikes[i];
        let hi = if i == n {
            truncation
        } else {
            slice.strikes[i + 1]
        };
        let (gamma, delta) = solve_bucket_numeric(
            &prior,
            lo,
            hi,
            slice.bucket_mass(i),
            slice.bucket_moment(i),
        )?;
        gammas.push(gamma);
        deltas.push(delta);
    }
    Ok(MredDensity {
        strikes: slice.strikes.clone(),
        calls: slice.calls.clone(),
        digitals: slice.digitals.clone(),
        bounds: slice.strikes.clone(),
        gammas,
        deltas,
        prior,
        truncation,
        combined: None,
    })
}

/// Tilted prior moment `∫_lo^hi x^k e^{δx} p(x) dx`, evaluated in log space.
fn tilted_moment(prior: &Prior, k: i32, delta: f64, lo: f64, hi: f64) -> f64 {
    quad::integrate(
        |x| {
            let log_term = delta * x + prior.log_pdf(x);
            if log_term.is_finite() {
                x.powi(k) * log_term.exp()
            } else {
                0.0
            }
        },
        lo,
        hi,
        QUAD_TOL,
    )
}

/// Damped 2-D Newton on `(ln γ, δ)` for one bucket: residuals are the mass
/// and first-moment constraint gaps; the Jacobian is built from the same
/// tilted moments of order 0..2.
fn solve_bucket_numeric(prior: &Prior, lo: f64, hi: f64, m: f64, s: f64) -> Result<(f64, f64)> {
    let residual_norm = |ln_gamma: f64, delta: f64| -> (f64, f64, f64) {
        let a0 = tilted_moment(prior, 0, delta, lo, hi);
        let a1 = tilted_moment(prior, 1, delta, lo, hi);
        let gamma = ln_gamma.exp();
        let r0 = gamma * a0 - m;
        let r1 = gamma * a1 - s;
        let norm = (r0 / m).abs().max((r1 / s).abs());
        (r0, r1, norm)
    };

    let prior_mass = prior.interval_mass(lo, hi);
    if !(prior_mass > 0.0) {
        return Err(Error::Domain(format!(
            "prior carries no mass on [{lo}, {hi})"
        )));
    }
    let mut ln_gamma = (m / prior_mass).ln();
    let mut delta = 0.0;

    for _ in 0..MAX_OUTER {
        let (r0, r1, norm) = residual_norm(ln_gamma, delta);
        if norm <= NEWTON_TOL {
            return Ok((ln_gamma.exp(), delta));
        }
        let a0 = tilted_moment(prior, 0, delta, lo, hi);
        let a1 = tilted_moment(prior, 1, delta, lo, hi);
        let a2 = tilted_moment(prior, 2, delta, lo, hi);
        let gamma = ln_gamma.exp();
        // Jacobian wrt (ln γ, δ) is γ·[[a0, a1], [a1, a2]]; its determinant
        // is positive by Cauchy-Schwarz unless the bucket degenerates.
        let det = gamma * (a0 * a2 - a1 * a1);
        if !(det > 0.0) {
            return Err(Error::NonConvergence {
                context: "relative-entropy bucket (degenerate moments)",
                residual: norm,
            });
        }
        let step_lng = (a2 * r0 - a1 * r1) / det;
        let step_del = (a0 * r1 - a1 * r0) / det;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand_lng = ln_gamma - scale * step_lng;
            let cand_del = delta - scale * step_del;
            let (_, _, cand_norm) = residual_norm(cand_lng, cand_del);
            if cand_norm < norm {
                ln_gamma = cand_lng;
                delta = cand_del;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                context: "relative-entropy bucket (no descent step)",
                residual: norm,
            });
        }
    }
    let (_, _, norm) = residual_norm(ln_gamma, delta);
    Err(Error::NonConvergence {
        context: "relative-entropy bucket (iteration cap)",
        residual: norm,
    })
}

/// One prior piece inside a tilt bucket: `p(x) = e^{log_alpha + beta·x}` on
/// `[lo, hi)`.
struct Piece {
    lo: f64,
    hi: f64,
    log_alpha: f64,
    beta: f64,
}

/// Tilted moments `A_k(δ) = Σ_pieces ∫ x^k e^{δx} p(x) dx`, computed with a
/// common exponent shift so extreme trial tilts stay finite. Returns
/// `(A_0, A_1, A_2)` scaled by `e^{−shift}` together with `shift`.
fn piece_moments(pieces: &[Piece], delta: f64) -> ([f64; 3], f64) {
    let shift = pieces
        .iter()
        .map(|p| {
            let b = p.beta + delta;
            let edge = if b > 0.0 && p.hi.is_finite() { p.hi } else { p.lo };
            p.log_alpha + b * edge
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; 3];
    for p in pieces {
        let a = p.log_alpha - shift;
        let b = p.beta + delta;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot += if p.hi.is_finite() {
                interval_moment(k, a, b, p.lo, p.hi)
            } else {
                tail_moment(k, a, b, p.lo)
            };
        }
    }
    (out, shift)
}

/// Analytic calibration for piecewise-exponential priors: per slice bucket,
/// a safeguarded 1-D Newton on the tilt exponent (the bucket mean is
/// strictly increasing in it), then the scale from the mass constraint.
pub fn calibrate_med_prior(slice: &MaturitySlice, prior: &MedDensity) -> Result<MredDensity> {
    let n = slice.last();
    let bounds = union_bounds(&slice.strikes, prior);
    let mut gammas = Vec::with_capacity(bounds.len());
    let mut deltas = Vec::with_capacity(bounds.len());
    let mut buckets = Vec::with_capacity(bounds.len());

    for i in 0..=n {
        let lo = slice.strikes[i];
        let hi = if i == n {
            f64::INFINITY
        } else {
            slice.strikes[i + 1]
        };
        let pieces = prior_pieces(prior, &bounds, lo, hi);
        let m = slice.bucket_mass(i);
        let s = slice.bucket_moment(i);
        let delta = solve_tilt_exponent(&pieces, s / m).map_err(|e| match e {
            Error::Domain(d) => Error::Arbitrage { bucket: i, detail: d },
            other => other,
        })?;
        let (moments, shift) = piece_moments(&pieces, delta);
        // γ = m / A_0 with the shift restored in log space.
        let gamma = (m.ln() - moments[0].ln() - shift).exp();
        for p in &pieces {
            gammas.push(gamma);
            deltas.push(delta);
            buckets.push(BucketParams {
                lower: p.lo,
                upper: p.hi,
                alpha: gamma * (p.log_alpha).exp(),
                beta: p.beta + delta,
            });
        }
    }

    let combined = assemble_combined(&bounds, buckets);
    Ok(MredDensity {
        strikes: slice.strikes.clone(),
        calls: slice.calls.clone(),
        digitals: slice.digitals.clone(),
        bounds,
        gammas,
        deltas,
        prior: Prior::Med(prior.clone()),
        truncation: f64::INFINITY,
        combined: Some(combined),
    })
}

/// Constraint strikes refined by the prior's bucket boundaries (slice
/// strikes win ties so constraint arrays stay aligned).
fn union_bounds(strikes: &[f64], prior: &MedDensity) -> Vec<f64> {
    let mut bounds = strikes.to_vec();
    for b in &prior.buckets {
        let x = b.lower;
        if !bounds
            .iter()
            .any(|&k| (k - x).abs() <= 1e-9 * (1.0 + x.abs()))
        {
            bounds.push(x);
        }
    }
    bounds.sort_by(f64::total_cmp);
    bounds
}

/// Prior pieces covering the slice bucket `[lo, hi)`, split at union bounds.
fn prior_pieces(prior: &MedDensity, bounds: &[f64], lo: f64, hi: f64) -> Vec<Piece> {
    let mut pieces = Vec::new();
    let inner: Vec<f64> = bounds
        .iter()
        .copied()
        .filter(|&u| u > lo && u < hi)
        .collect();
    let mut edges = vec![lo];
    edges.extend(inner);
    edges.push(hi);
    for pair in edges.windows(2) {
        let (plo, phi) = (pair[0], pair[1]);
        // The prior bucket is identified at an interior point so that shared
        // boundaries resolve consistently for right-open buckets.
        let probe = if phi.is_finite() {
            0.5 * (plo + phi)
        } else {
            plo + 1.0
        };
        let b = &prior.buckets[bucket_index(&prior.strikes, probe)];
        pieces.push(Piece {
            lo: plo,
            hi: phi,
            log_alpha: b.alpha.ln(),
            beta: b.beta,
        });
    }
    pieces
}

/// Find the tilt exponent with bucket mean `kbar`: safeguarded Newton on the
/// strictly increasing mean function, bracketing first.
fn solve_tilt_exponent(pieces: &[Piece], kbar: f64) -> Result<f64> {
    let left = pieces[0].lo;
    let right = pieces.last().expect("nonempty bucket").hi;
    if kbar <= left || (right.is_finite() && kbar >= right) {
        return Err(Error::Domain(format!(
            "bucket mean {kbar} outside ({left}, {right})"
        )));
    }
    // Tail buckets only integrate while δ + β_tail < 0.
    let cap = if right.is_finite() {
        f64::INFINITY
    } else {
        -pieces.last().expect("nonempty bucket").beta
    };
    let mean_var = |delta: f64| -> (f64, f64) {
        let (a, _) = piece_moments(pieces, delta);
        let mean = a[1] / a[0];
        (mean, a[2] / a[0] - mean * mean)
    };

    let (mut lo_b, mut hi_b);
    if cap.is_finite() {
        let mut gap = 1.0;
        while mean_var(cap - gap).0 <= kbar {
            gap *= 0.25;
            if gap < 1e-300 {
                return Err(Error::NonConvergence {
                    context: "tilt exponent bracket (upper)",
                    residual: kbar,
                });
            }
        }
        hi_b = cap - gap;
        let mut span = 1.0;
        lo_b = hi_b - span;
        while mean_var(lo_b).0 >= kbar {
            span *= 4.0;
            lo_b = hi_b - span;
            if span > 1e12 {
                return Err(Error::NonConvergence {
                    context: "tilt exponent bracket (lower)",
                    residual: kbar,
                });
            }
        }
    } else {
        let step = 4.0 / (right - left);
        hi_b = step;
        while mean_var(hi_b).0 <= kbar {
            hi_b *= 2.0;
            if hi_b > 1e12 {
                return Err(Error::NonConvergence {
                    context: "tilt exponent bracket (upper)",
                    residual: kbar,
                });
            }
        }
        lo_b = -step;
        while mean_var(lo_b).0 >= kbar {
            lo_b *= 2.0;
            if lo_b < -1e12 {
                return Err(Error::NonConvergence {
                    context: "tilt exponent bracket (lower)",
                    residual: kbar,
                });
            }
        }
    }

    let mut x = 0.5 * (lo_b + hi_b);
    for _ in 0..200 {
        let (mean, var) = mean_var(x);
        let gap = mean - kbar;
        if gap.abs() <= 1e-12 * kbar {
            return Ok(x);
        }
        if gap > 0.0 {
            hi_b = x;
        } else {
            lo_b = x;
        }
        let candidate = x - gap / var;
        x = if candidate > lo_b && candidate < hi_b {
            candidate
        } else {
            0.5 * (lo_b + hi_b)
        };
        if hi_b - lo_b <= f64::EPSILON * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Closed-form price arrays at every union bound from the per-bucket
/// exponentials, assembling the piecewise-exponential equivalent density.
fn assemble_combined(bounds: &[f64], buckets: Vec<BucketParams>) -> MedDensity {
    let m = bounds.len();
    let mut i0 = vec![0.0; m];
    let mut i1 = vec![0.0; m];
    for (j, b) in buckets.iter().enumerate() {
        let a = b.alpha.ln();
        if b.upper.is_finite() {
            i0[j] = interval_moment(0, a, b.beta, b.lower, b.upper);
            i1[j] = interval_moment(1, a, b.beta, b.lower, b.upper);
        } else {
            i0[j] = tail_moment(0, a, b.beta, b.lower);
            i1[j] = tail_moment(1, a, b.beta, b.lower);
        }
    }
    let mut digitals = vec![0.0; m];
    let mut calls = vec![0.0; m];
    let (mut acc0, mut acc1) = (0.0, 0.0);
    for j in (0..m).rev() {
        acc0 += i0[j];
        acc1 += i1[j];
        digitals[j] = acc0;
        calls[j] = acc1 - bounds[j] * acc0;
    }
    MedDensity {
        strikes: bounds.to_vec(),
        calls,
        digitals,
        buckets,
    }
}

impl MredDensity {
    /// The piecewise-exponential equivalent, present when the prior is one.
    pub fn as_med(&self) -> Option<&MedDensity> {
        self.combined.as_ref()
    }

    /// `ln h(x)`; `−∞` outside the support.
    pub fn log_pdf(&self, x: f64) -> f64 {
        if let Some(c) = &self.combined {
            if x < 0.0 {
                return f64::NEG_INFINITY;
            }
            let b = &c.buckets[bucket_index(&c.strikes, x)];
            return b.alpha.ln() + b.beta * x;
        }
        if x < 0.0 || x >= self.truncation {
            return f64::NEG_INFINITY;
        }
        let i = bucket_index(&self.bounds, x);
        self.gammas[i].ln() + self.deltas[i] * x + self.prior.log_pdf(x)
    }

    /// I-divergence to the prior `∫ h ln(h/p)` in closed form
    /// `Σ_i m_i ln γ_i + δ_i s_i`; nonnegative, zero iff the prior already
    /// satisfies every constraint.
    pub fn divergence(&self) -> f64 {
        match &self.combined {
            Some(c) => (0..c.buckets.len())
                .map(|i| c.bucket_mass(i) * self.gammas[i].ln() + self.deltas[i] * c.bucket_moment(i))
                .sum(),
            None => (0..self.gammas.len())
                .map(|i| {
                    let mass = if i + 1 == self.bounds.len() {
                        self.digitals[i]
                    } else {
                        self.digitals[i] - self.digitals[i + 1]
                    };
                    let lhs = self.calls[i] + self.bounds[i] * self.digitals[i];
                    let moment = if i + 1 == self.bounds.len() {
                        lhs
                    } else {
                        lhs - (self.calls[i + 1] + self.bounds[i + 1] * self.digitals[i + 1])
                    };
                    mass * self.gammas[i].ln() + self.deltas[i] * moment
                })
                .sum(),
        }
    }

    /// Bucket-split quadrature of `weight(x)·h(x)` over `[from, truncation)`.
    fn integrate_above(&self, from: f64, weight: impl Fn(f64) -> f64) -> f64 {
        let lo = from.max(0.0);
        if lo >= self.truncation {
            return 0.0;
        }
        let mut total = 0.0;
        let mut start = lo;
        for i in 0..self.bounds.len() {
            let hi = if i + 1 == self.bounds.len() {
                self.truncation
            } else {
                self.bounds[i + 1].min(self.truncation)
            };
            if hi <= start {
                continue;
            }
            total += quad::integrate(|x| weight(x) * self.pdf(x), start, hi, QUAD_TOL);
            start = hi;
        }
        total
    }
}

impl Density for MredDensity {
    fn pdf(&self, x: f64) -> f64 {
        let l = self.log_pdf(x);
        if l.is_finite() {
            l.exp()
        } else {
            0.0
        }
    }

    fn digital(&self, strike: f64) -> f64 {
        if let Some(c) = &self.combined {
            return c.digital(strike);
        }
        if strike < 0.0 {
            return 1.0;
        }
        self.integrate_above(strike, |_| 1.0)
    }

    fn call(&self, strike: f64) -> f64 {
        if let Some(c) = &self.combined {
            return c.call(strike);
        }
        if strike < 0.0 {
            return self.calls[0] - strike;
        }
        self.integrate_above(strike, |x| x - strike)
    }

    fn inverse_cdf(&self, level: f64) -> Result<f64> {
        if let Some(c) = &self.combined {
            return c.inverse_cdf(level);
        }
        if !(0.0..1.0).contains(&level) {
            return Err(Error::OutOfRange(format!(
                "inverse CDF needs a level in [0,1), got {level}"
            )));
        }
        let (mut lo, mut hi) = (0.0, self.truncation);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn delta(&self, strike: f64, df: f64) -> f64 {
        // Δ = (DF/S)(C̃(K) + K·D̃(K)) with S = DF·F, so DF cancels.
        let _ = df;
        (self.call(strike) + strike * self.digital(strike)) / self.calls[0]
    }
}
