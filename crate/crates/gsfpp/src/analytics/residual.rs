//! Finite-difference residuals of the governing equations.
//!
//! The pgf satisfies `∂ψ/∂t = −λ^{α(t)} (1−u)^{α(t)} ψ` and the pmf the
//! fractional-difference system
//! `d/dt p_m = −λ^{α(t)} Σ_{r≤m} binom(α(t), r) (−1)^r p_{m−r}`,
//! both only where `α(·)` is constant. Residuals use central differences,
//! so they shrink as `O(h²)` when the stencil stays inside one segment.

use super::{binom, pgf, pmf_convolution, SeriesParams};
use crate::schedule::{AlphaSchedule, Rate};
use crate::{Error, Result};

fn check_stencil(schedule: &AlphaSchedule, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    if !(t - h > 0.0) {
        return Err(Error::Domain(format!(
            "stencil [{}, {}] leaves the positive time axis",
            t - h,
            t + h
        )));
    }
    let alpha = schedule.alpha_at(t)?;
    for boundary in schedule.boundaries().iter().skip(1) {
        if (t - boundary).abs() <= h {
            return Err(Error::Domain(format!(
                "stencil around t = {t} (h = {h}) crosses segment boundary {boundary}"
            )));
        }
    }
    Ok(alpha)
}

/// `|∂_t ψ + λ^{α(t)} (1−u)^{α(t)} ψ|` with a central-difference time
/// derivative at an interior point of a segment.
pub fn pde_residual_pgf(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t: f64,
    u: f64,
    h: f64,
) -> Result<f64> {
    let alpha = check_stencil(schedule, t, h)?;
    let forward = pgf(schedule, lambda, t + h, u)?;
    let backward = pgf(schedule, lambda, t - h, u)?;
    let center = pgf(schedule, lambda, t, u)?;
    let dt_psi = (forward - backward) / (2.0 * h);
    let rhs = -(lambda.get().powf(alpha)) * (1.0 - u).powf(alpha) * center;
    Ok((dt_psi - rhs).abs())
}

/// `|d/dt p_m − RHS|` of the pmf governing system at an interior point,
/// with pmf values from the convolution evaluator.
pub fn ode_residual_pmf(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t: f64,
    m: usize,
    params: &SeriesParams,
    h: f64,
) -> Result<f64> {
    let alpha = check_stencil(schedule, t, h)?;
    let mut p = *params;
    p.m_max = p.m_max.max(m);
    let forward = pmf_convolution(schedule, lambda, t + h, &p)?;
    let backward = pmf_convolution(schedule, lambda, t - h, &p)?;
    let center = pmf_convolution(schedule, lambda, t, &p)?;
    let dt_p = (forward.probs[m] - backward.probs[m]) / (2.0 * h);
    let scale = lambda.get().powf(alpha);
    let mut rhs = 0.0;
    for r in 0..=m {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        rhs += binom(alpha, r) * sign * center.probs[m - r];
    }
    rhs *= -scale;
    Ok((dt_p - rhs).abs())
}
