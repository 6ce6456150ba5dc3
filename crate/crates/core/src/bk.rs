//! Calls-only maximum-entropy calibration (Buchen-Kelly).
//!
//! With call constraints alone, the entropy maximizer is
//! `g(x) = exp(Σ λ_i (x − K_i)^+)/μ`: continuous, piecewise exponential,
//! with one multiplier per strike. The multipliers solve an m-dimensional
//! root-finding problem; the Newton Jacobian is the covariance matrix of the
//! hockey-stick payoffs under the current density, so every iteration is
//! closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::med::{self, BucketParams, MedDensity};
use crate::quotes::{MaturitySlice, VALIDATION_SLACK};

/// Maximum Newton iterations.
const MAX_OUTER: usize = 60;

/// Maximum step halvings per iteration.
const MAX_HALVINGS: usize = 40;

/// Convergence: max absolute call residual relative to the forward.
const REL_TOL: f64 = 1e-9;

/// Below this |b·width| the interval moments switch to series.
const MOMENT_SERIES_THRESHOLD: f64 = 0.05;

/// A calibrated calls-only density `exp(Σ λ_i (x − K_i)^+)/μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BkDensity {
    /// Strikes `K_1 = 0 < … < K_m`; the first carries the forward constraint.
    pub strikes: Vec<f64>,
    /// Model call prices at the strikes (equal to the inputs at convergence).
    pub calls: Vec<f64>,
    /// Model digital prices at the strikes.
    pub digitals: Vec<f64>,
    /// Multipliers `λ_1..λ_m`; `Σ λ_i < 0` for integrability.
    pub lambdas: Vec<f64>,
    /// Normalizer `μ = ∫₀^∞ exp(Σ λ_i (x − K_i)^+) dx`.
    pub mu: f64,
    /// The same density in per-bucket `α e^{βx}` form.
    pub buckets: Vec<BucketParams>,
    /// Max absolute call residual at convergence.
    pub residual: f64,
}

/// `φ_j(z) = Σ_{i≥0} z^i / (i! (i+j+1))`, so `∫₀^w t^j e^{bt} dt = w^{j+1} φ_j(bw)`.
fn phi(j: usize, z: f64) -> f64 {
    match j {
        0 => {
            if z == 0.0 {
                1.0
            } else {
                z.exp_m1() / z
            }
        }
        1 => {
            if z.abs() <= MOMENT_SERIES_THRESHOLD {
                // Horner form of 1/2 + z/3 + z²/8 + z³/30 + z⁴/144 + …
                0.5 + z * (1.0 / 3.0
                    + z * (0.125
                        + z * (1.0 / 30.0
                            + z * (1.0 / 144.0
                                + z * (1.0 / 840.0 + z * (1.0 / 5760.0 + z / 45360.0))))))
            } else {
                (z.exp() * (z - 1.0) + 1.0) / (z * z)
            }
        }
        2 => {
            if z.abs() <= MOMENT_SERIES_THRESHOLD {
                1.0 / 3.0
                    + z * (0.25
                        + z * (0.1
                            + z * (1.0 / 36.0
                                + z * (1.0 / 168.0
                                    + z * (1.0 / 960.0 + z * (1.0 / 6480.0 + z / 50400.0))))))
            } else {
                (z.exp() * (z * (z - 2.0) + 2.0) - 2.0) / (z * z * z)
            }
        }
        _ => unreachable!("moments of order > 2 are never needed"),
    }
}

/// `∫_lo^hi x^k e^{a + bx} dx` for `k ≤ 2`, stable as `b → 0`.
///
/// Anchored at the edge where the exponent peaks, so `φ` only ever sees a
/// nonpositive argument and nothing overflows before the result does.
pub(crate) fn interval_moment(k: usize, a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    let z = b * w;
    // Substituting distance from the anchor edge gives
    // ∫ x^k e^{a+bx} = e^{a+b·edge} Σ_j C(k,j) edge^{k−j} (∓1)^j w^{j+1} φ_j(∓|z|).
    let (edge, sign, zz) = if z > 0.0 { (hi, -1.0, -z) } else { (lo, 1.0, z) };
    let scale = (a + b * edge).exp();
    let j0 = w * phi(0, zz);
    match k {
        0 => scale * j0,
        1 => {
            let j1 = w * w * phi(1, zz);
            scale * (edge * j0 + sign * j1)
        }
        2 => {
            let j1 = w * w * phi(1, zz);
            let j2 = w * w * w * phi(2, zz);
            scale * (edge * edge * j0 + sign * 2.0 * edge * j1 + j2)
        }
        _ => unreachable!("moments of order > 2 are never needed"),
    }
}

/// `∫_lo^∞ x^k e^{a + bx} dx` for `k ≤ 2` and `b < 0`.
pub(crate) fn tail_moment(k: usize, a: f64, b: f64, lo: f64) -> f64 {
    debug_assert!(b < 0.0);
    let scale = (a + b * lo).exp();
    let r = -1.0 / b;
    match k {
        0 => scale * r,
        1 => scale * r * (lo + r),
        2 => scale * r * (lo * lo + 2.0 * r * (lo + r)),
        _ => unreachable!("moments of order > 2 are never needed"),
    }
}

/// Per-segment exponent coefficients `(a_j, b_j)` with
/// `q(x) = a_j + b_j x` on `[K_j, K_{j+1})`.
fn segment_coefficients(strikes: &[f64], lambdas: &[f64]) -> Vec<(f64, f64)> {
    let mut coeffs = Vec::with_capacity(strikes.len());
    let (mut a, mut b) = (0.0, 0.0);
    for (k, lam) in strikes.iter().zip(lambdas) {
        b += lam;
        a -= lam * k;
        coeffs.push((a, b));
    }
    coeffs
}

/// Per-segment integrals `∫ x^order e^{Σ λ_i (x−K_i)^+} dx` over each
/// `[K_j, K_{j+1})` and the final `[K_m, ∞)`.
///
/// Errors with [`Error::Integrability`] when `Σ λ_i ≥ 0`.
pub fn moments(strikes: &[f64], lambdas: &[f64], order: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(strikes.len(), lambdas.len());
    if lambdas.iter().sum::<f64>() >= 0.0 {
        return Err(Error::Integrability);
    }
    let coeffs = segment_coefficients(strikes, lambdas);
    let m = strikes.len();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let (a, b) = coeffs[j];
        out.push(if j + 1 == m {
            tail_moment(order, a, b, strikes[j])
        } else {
            interval_moment(order, a, b, strikes[j], strikes[j + 1])
        });
    }
    Ok(out)
}

/// Suffix sums `S_j = Σ_{k≥j} v_k`.
fn suffix_sums(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut acc = 0.0;
    for (o, v) in out.iter_mut().zip(values).rev() {
        acc += v;
        *o = acc;
    }
    out
}

/// Model call prices and the normalizer at multipliers `lambdas`.
fn model_calls(strikes: &[f64], lambdas: &[f64]) -> Result<(Vec<f64>, f64)> {
    let s0 = suffix_sums(&moments(strikes, lambdas, 0)?);
    let s1 = suffix_sums(&moments(strikes, lambdas, 1)?);
    let mu = s0[0];
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Integrability);
    }
    let calls = strikes
        .iter()
        .enumerate()
        .map(|(j, k)| (s1[j] - k * s0[j]) / mu)
        .collect();
    Ok((calls, mu))
}

/// Newton Jacobian `J_ij = Cov((X−K_i)^+, (X−K_j)^+)` under the density with
/// multipliers `lambdas`; symmetric positive semidefinite.
pub fn covariance_matrix(strikes: &[f64], lambdas: &[f64]) -> Result<Vec<Vec<f64>>> {
    let s0 = suffix_sums(&moments(strikes, lambdas, 0)?);
    let s1 = suffix_sums(&moments(strikes, lambdas, 1)?);
    let s2 = suffix_sums(&moments(strikes, lambdas, 2)?);
    let mu = s0[0];
    let m = strikes.len();
    let model: Vec<f64> = (0..m).map(|j| (s1[j] - strikes[j] * s0[j]) / mu).collect();
    let mut cov = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let (ki, kj) = (strikes[i], strikes[j]);
            let cross = (s2[j] - (ki + kj) * s1[j] + ki * kj * s0[j]) / mu;
            let value = cross - model[i] * model[j];
            cov[i][j] = value;
            cov[j][i] = value;
        }
    }
    Ok(cov)
}

/// Reject call curves that admit arbitrage before running Newton.
fn validate_call_curve(strikes: &[f64], calls: &[f64]) -> Result<()> {
    let mut violations = Vec::new();
    if strikes.is_empty() || strikes[0] != 0.0 {
        violations.push("first strike must be 0 and carry the forward".to_string());
    }
    if calls.len() != strikes.len() {
        violations.push("strike/call lengths differ".to_string());
    } else {
        let mut prev_slope = -1.0;
        for j in 0..calls.len() {
            if calls[j] <= 0.0 {
                violations.push(format!("call at strike {} not positive", strikes[j]));
            }
            if j + 1 < calls.len() {
                if strikes[j + 1] - strikes[j] <= VALIDATION_SLACK {
                    violations.push(format!("strikes not increasing at {}", strikes[j]));
                    continue;
                }
                let slope = (calls[j + 1] - calls[j]) / (strikes[j + 1] - strikes[j]);
                if slope >= -VALIDATION_SLACK {
                    violations.push(format!("calls not decreasing at strike {}", strikes[j]));
                }
                // Convexity: slopes must not decrease; the first must stay > −1.
                if slope < prev_slope - VALIDATION_SLACK {
                    violations.push(format!("call curve concave at strike {}", strikes[j]));
                }
                prev_slope = slope;
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation { violations })
    }
}

/// Calibrate to calls alone from the forward-only start
/// (`λ_1 = −1/F`, others 0).
pub fn calibrate(strikes: &[f64], calls: &[f64]) -> Result<BkDensity> {
    validate_call_curve(strikes, calls)?;
    let mut seed = vec![0.0; strikes.len()];
    seed[0] = -1.0 / calls[0];
    calibrate_seeded(strikes, calls, &seed)
}

/// Multiplier start taken from a calls+digitals density: first differences of
/// its bucket exponents. The sum telescopes to the tail exponent, so the
/// start is always integrable.
pub fn seed_from_med(med: &MedDensity) -> Vec<f64> {
    let mut seed = Vec::with_capacity(med.buckets.len());
    let mut prev = 0.0;
    for b in &med.buckets {
        seed.push(b.beta - prev);
        prev = b.beta;
    }
    seed
}

/// Calibrate to the slice's calls alone, warm-started from its
/// calls+digitals density (digitals are used only for the start, never as
/// constraints).
pub fn calibrate_slice(slice: &MaturitySlice) -> Result<BkDensity> {
    let med = med::calibrate(slice)?;
    calibrate_seeded(&slice.strikes, &slice.calls, &seed_from_med(&med))
}

/// Damped Newton from an explicit multiplier start; see [`calibrate`].
pub fn calibrate_seeded(strikes: &[f64], calls: &[f64], seed: &[f64]) -> Result<BkDensity> {
    validate_call_curve(strikes, calls)?;
    if seed.len() != strikes.len() || seed.iter().sum::<f64>() >= 0.0 {
        return Err(Error::Integrability);
    }
    let m = strikes.len();
    let tol = REL_TOL * calls[0];
    let mut lambdas = seed.to_vec();
    let mut best_residual = f64::INFINITY;

    for _ in 0..MAX_OUTER {
        let (model, _) = model_calls(strikes, &lambdas)?;
        let residual = max_abs_gap(&model, calls);
        best_residual = best_residual.min(residual);
        if residual <= tol {
            return Ok(assemble(strikes, &lambdas, residual));
        }
        let cov = covariance_matrix(strikes, &lambdas)?;
        let jac = DMatrix::from_fn(m, m, |i, j| cov[i][j]);
        let rhs = DVector::from_fn(m, |i, _| model[i] - calls[i]);
        let step = jac.lu().solve(&rhs).ok_or(Error::NonConvergence {
            context: "calls-only Newton (singular Jacobian)",
            residual,
        })?;
        // Halve the step until it keeps Σλ < 0 and shrinks the residual.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let candidate: Vec<f64> = lambdas
                .iter()
                .enumerate()
                .map(|(i, l)| l - scale * step[i])
                .collect();
            if candidate.iter().sum::<f64>() < 0.0 {
                if let Ok((cand_model, _)) = model_calls(strikes, &candidate) {
                    if max_abs_gap(&cand_model, calls) < residual {
                        lambdas = candidate;
                        accepted = true;
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                context: "calls-only Newton (no descent step)",
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        context: "calls-only Newton (iteration cap)",
        residual: best_residual,
    })
}

fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Package converged multipliers as a density with per-bucket parameters and
/// model prices at the strikes.
fn assemble(strikes: &[f64], lambdas: &[f64], residual: f64) -> BkDensity {
    let s0 = suffix_sums(&moments(strikes, lambdas, 0).expect("converged state is integrable"));
    let s1 = suffix_sums(&moments(strikes, lambdas, 1).expect("converged state is integrable"));
    let mu = s0[0];
    let m = strikes.len();
    let coeffs = segment_coefficients(strikes, lambdas);
    let buckets = (0..m)
        .map(|j| BucketParams {
            lower: strikes[j],
            upper: if j + 1 == m {
                f64::INFINITY
            } else {
                strikes[j + 1]
            },
            alpha: (coeffs[j].0 - mu.ln()).exp(),
            beta: coeffs[j].1,
        })
        .collect();
    let calls = (0..m).map(|j| (s1[j] - strikes[j] * s0[j]) / mu).collect();
    let mut digitals: Vec<f64> = (0..m).map(|j| s0[j] / mu).collect();
    digitals[0] = 1.0;
    BkDensity {
        strikes: strikes.to_vec(),
        calls,
        digitals,
        lambdas: lambdas.to_vec(),
        mu,
        buckets,
        residual,
    }
}
