//! Closed-form and series quantities of the subordinated counting process:
//! pmf (multinomial series plus an independent convolution oracle), pgf,
//! characteristic function, hitting-time probabilities, per-segment Lévy
//! measures, and finite-difference residual checks of the governing
//! equations.

mod levy;
mod residual;
mod series;

pub use levy::{levy_segment, LevySegmentMeasure};
pub use residual::{ode_residual_pmf, pde_residual_pgf};
pub use series::{pmf_convolution, pmf_segment, pmf_series};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::schedule::{AlphaSchedule, Rate};
use crate::{Error, Result};

/// Truncation and tolerance control for the alternating-series evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesParams {
    /// Outer truncation index for the Σ_r series.
    pub r_max: usize,
    /// Absolute tail tolerance for adaptive stopping.
    pub tol: f64,
    /// Largest state evaluated in table form.
    pub m_max: usize,
}

impl Default for SeriesParams {
    fn default() -> Self {
        SeriesParams {
            r_max: 60,
            tol: 1e-10,
            m_max: 32,
        }
    }
}

impl SeriesParams {
    pub fn validate(&self) -> Result<()> {
        if self.r_max < 1 {
            return Err(Error::Domain("r_max must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain("tol must be positive".into()));
        }
        Ok(())
    }
}

/// A finite pmf table for states `0..=m_max` with a recorded bound on the
/// mass beyond the truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PmfTable {
    pub probs: Vec<f64>,
    pub trunc_bound: f64,
    /// Set when some segment left the documented validity region of the
    /// alternating series (`λ^α Δt > 1.5`); values are still computed but
    /// should not be trusted blindly.
    pub low_confidence: bool,
}

impl PmfTable {
    /// Point mass at zero, the `t = 0` initial condition.
    pub fn delta_at_zero(m_max: usize) -> Self {
        let mut probs = vec![0.0; m_max + 1];
        probs[0] = 1.0;
        PmfTable {
            probs,
            trunc_bound: 0.0,
            low_confidence: false,
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Falling factorial `(z)_m = z (z−1) ⋯ (z−m+1)`, as a direct product.
/// Gamma-ratio forms hit poles at nonpositive integers; the product is
/// exact and finite everywhere.
pub fn falling_factorial(z: f64, m: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..m {
        acc *= z - i as f64;
    }
    acc
}

/// Generalized binomial coefficient `binom(α, r) = (α)_r / r!`.
pub(crate) fn binom(alpha: f64, r: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..r {
        acc *= (alpha - i as f64) / (i as f64 + 1.0);
    }
    acc
}

/// Probability generating function
/// `ψ(u, t) = exp(−∫₀ᵗ λ^{α(s)} (1−u)^{α(s)} ds)`, evaluated through the
/// exponent integral at `w = λ(1−u)`.
pub fn pgf(schedule: &AlphaSchedule, lambda: Rate, t: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("pgf argument must lie in [0, 1], got {u}")));
    }
    Ok((-schedule.exponent_integral(t, lambda.get() * (1.0 - u))?).exp())
}

/// Characteristic function `φ(θ) = Σ_m e^{iθm} p_m`, evaluated as the pgf
/// closed form at `u = e^{iθ}` with the principal branch of `(1−u)^α`.
/// `Re((1−e^{iθ})^α) ≥ 0` for `α ∈ (0, 1]`, so the modulus never exceeds 1.
pub fn pcf(schedule: &AlphaSchedule, lambda: Rate, t: f64, theta: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let u = Complex64::new(0.0, theta).exp();
    let one_minus_u = Complex64::new(1.0, 0.0) - u;
    let mut exponent = Complex64::new(0.0, 0.0);
    for (len, alpha) in schedule.clipped_segments(t)? {
        exponent += lambda.get().powf(alpha) * one_minus_u.powf(alpha) * len;
    }
    Ok((-exponent).exp())
}

/// Hitting-time CDF `P{τ_k < t} = P{ξ(t) ≥ k} = 1 − Σ_{m<k} p_m`, with the
/// pmf taken from the convolution evaluator.
pub fn hitting_cdf(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t: f64,
    k: usize,
    params: &SeriesParams,
) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("hitting level k must be at least 1".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut p = params.clone();
    p.m_max = p.m_max.max(k - 1);
    let table = pmf_convolution(schedule, lambda, t, &p)?;
    let below: f64 = table.probs[..k].iter().sum();
    Ok((1.0 - below).clamp(0.0, 1.0))
}
