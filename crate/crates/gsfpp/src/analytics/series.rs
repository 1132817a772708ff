//! Alternating-series pmf evaluators and the convolution oracle.
//!
//! Two independent routes to the same pmf:
//!
//! * [`pmf_series`] — the multinomial series over compositions of the outer
//!   index, evaluated directly on the multi-segment schedule;
//! * [`pmf_convolution`] — per-segment single-α series convolved across
//!   segments, following the distributional identity of the process as a
//!   sum of independent per-segment counts.
//!
//! Both suffer catastrophic cancellation when `λ^α Δt` grows; the documented
//! validity region is `λ^{α_k} Δt_k ≤ 1.5` per segment. Compensated (Kahan)
//! accumulation and adaptive stopping keep the error near `tol` inside that
//! region; outside it tables carry a low-confidence flag.

use statrs::function::gamma::ln_gamma;

use super::{falling_factorial, PmfTable, SeriesParams};
use crate::schedule::{AlphaSchedule, Rate};
use crate::{Error, Result};

/// Per-segment magnitude `λ^α Δt` beyond which the alternating series is
/// flagged low-confidence.
pub(crate) const SERIES_VALIDITY_LIMIT: f64 = 1.5;

#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, value: f64) {
        let y = value - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

struct SeriesEval {
    value: f64,
    tail_bound: f64,
}

/// Consecutive outer terms that must fall below `tol` before stopping.
const STOP_RUN: usize = 3;

fn ln_factorial(x: usize) -> f64 {
    ln_gamma(x as f64 + 1.0)
}

/// `p_m` of the constant-α process over an interval with `a = λ^α dt`:
/// `((−1)^m / m!) Σ_r ((−a)^r / r!) (αr)_m`.
fn segment_series(alpha: f64, a: f64, m: usize, params: &SeriesParams) -> Result<SeriesEval> {
    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
    let inv_mfact = (-ln_factorial(m)).exp();
    let mut acc = Kahan::default();
    let mut coeff = 1.0; // (−a)^r / r!
    let mut small_run = 0;
    let mut recent = [0.0f64; STOP_RUN];
    for r in 0..=params.r_max {
        let term = sign_m * coeff * falling_factorial(alpha * r as f64, m) * inv_mfact;
        acc.add(term);
        recent[r % STOP_RUN] = term.abs();
        // the run of zero terms before r reaches m must not trigger the stop
        if r > m {
            if term.abs() < params.tol {
                small_run += 1;
            } else {
                small_run = 0;
            }
            if small_run >= STOP_RUN {
                return Ok(SeriesEval {
                    value: acc.sum,
                    tail_bound: 2.0 * recent.iter().sum::<f64>(),
                });
            }
        }
        coeff *= -a / (r as f64 + 1.0);
    }
    Err(Error::Truncation {
        achieved: recent.iter().cloned().fold(0.0, f64::max),
        tol: params.tol,
        r_max: params.r_max,
    })
}

/// pmf of the constant-α segment process at state `m`, for an interval of
/// length `dt`. Collapses to the Poisson pmf for `α = 1`.
pub fn pmf_segment(
    alpha: f64,
    lambda: Rate,
    dt: f64,
    m: usize,
    params: &SeriesParams,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    params.validate()?;
    let a = lambda.get().powf(alpha) * dt;
    Ok(segment_series(alpha, a, m, params)?.value)
}

/// Full table of the constant-α segment pmf for states `0..=m_max`.
fn pmf_segment_table(
    alpha: f64,
    lambda: Rate,
    dt: f64,
    params: &SeriesParams,
) -> Result<PmfTable> {
    let a = lambda.get().powf(alpha) * dt;
    let mut probs = Vec::with_capacity(params.m_max + 1);
    let mut series_bound = 0.0;
    for m in 0..=params.m_max {
        let eval = segment_series(alpha, a, m, params)?;
        probs.push(eval.value);
        series_bound += eval.tail_bound;
    }
    let total: f64 = probs.iter().sum();
    Ok(PmfTable {
        probs,
        trunc_bound: (1.0 - total).max(0.0) + series_bound,
        low_confidence: a > SERIES_VALIDITY_LIMIT,
    })
}

/// pmf of the variable-order process via the multinomial series over
/// compositions `(x_1, …, x_n)` of the outer index `r`:
///
/// ```text
/// p_m = ((−1)^m / m!) Σ_r (−1)^r Σ_{x_1+…+x_n=r}
///         (Σ α_k x_k)_m ∏_k c_k^{x_k} / x_k!,   c_k = λ^{α_k} Δt_k.
/// ```
///
/// Per-composition weights are formed in log space; the only sign carriers
/// are `(−1)^{m+r}` and the falling factorial.
pub fn pmf_series(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t: f64,
    m: usize,
    params: &SeriesParams,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    params.validate()?;
    if t == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let segments = schedule.clipped_segments(t)?;
    let log_c: Vec<f64> = segments
        .iter()
        .map(|&(len, alpha)| (lambda.get().powf(alpha) * len).ln())
        .collect();
    let alphas: Vec<f64> = segments.iter().map(|&(_, a)| a).collect();
    let n = segments.len();

    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
    let inv_mfact = (-ln_factorial(m)).exp();
    let mut acc = Kahan::default();
    let mut small_run = 0;
    let mut recent = [0.0f64; STOP_RUN];
    let mut composition = vec![0usize; n];
    for r in 0..=params.r_max {
        let mut inner = Kahan::default();
        for_each_composition(r, n, &mut composition, 0, &mut |x| {
            let z: f64 = x.iter().zip(&alphas).map(|(&xi, &ai)| xi as f64 * ai).sum();
            let ff = falling_factorial(z, m);
            if ff == 0.0 {
                return;
            }
            let log_w: f64 = x
                .iter()
                .zip(&log_c)
                .map(|(&xi, &lc)| xi as f64 * lc - ln_factorial(xi))
                .sum();
            inner.add(log_w.exp() * ff);
        });
        let sign_r = if r % 2 == 0 { 1.0 } else { -1.0 };
        let outer = sign_m * sign_r * inner.sum * inv_mfact;
        acc.add(outer);
        recent[r % STOP_RUN] = outer.abs();
        if r > m {
            if outer.abs() < params.tol {
                small_run += 1;
            } else {
                small_run = 0;
            }
            if small_run >= STOP_RUN {
                return Ok(acc.sum);
            }
        }
    }
    Err(Error::Truncation {
        achieved: recent.iter().cloned().fold(0.0, f64::max),
        tol: params.tol,
        r_max: params.r_max,
    })
}

/// Enumerates all compositions of `r` into `n` nonnegative parts.
fn for_each_composition<F: FnMut(&[usize])>(
    r: usize,
    n: usize,
    scratch: &mut Vec<usize>,
    pos: usize,
    f: &mut F,
) {
    if pos + 1 == n {
        scratch[pos] = r;
        f(scratch);
        return;
    }
    for v in 0..=r {
        scratch[pos] = v;
        for_each_composition(r - v, n, scratch, pos + 1, f);
    }
}

/// pmf table of the variable-order process as the discrete convolution of
/// per-segment tables. The independent oracle for [`pmf_series`].
pub fn pmf_convolution(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t: f64,
    params: &SeriesParams,
) -> Result<PmfTable> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    params.validate()?;
    if t == 0.0 {
        return Ok(PmfTable::delta_at_zero(params.m_max));
    }
    let mut table: Option<PmfTable> = None;
    let mut series_bound = 0.0;
    let mut low_confidence = false;
    for (len, alpha) in schedule.clipped_segments(t)? {
        let seg = pmf_segment_table(alpha, lambda, len, params)?;
        series_bound += seg.trunc_bound;
        low_confidence |= seg.low_confidence;
        table = Some(match table {
            None => seg,
            Some(prev) => convolve(&prev, &seg, params.m_max),
        });
    }
    let mut table = table.expect("schedule has at least one segment");
    let total = table.total();
    table.trunc_bound = (1.0 - total).max(0.0) + series_bound;
    table.low_confidence = low_confidence;
    Ok(table)
}

fn convolve(a: &PmfTable, b: &PmfTable, m_max: usize) -> PmfTable {
    let mut probs = vec![0.0; m_max + 1];
    for (i, &pa) in a.probs.iter().enumerate() {
        for (j, &pb) in b.probs.iter().enumerate() {
            if i + j > m_max {
                break;
            }
            probs[i + j] += pa * pb;
        }
    }
    PmfTable {
        probs,
        trunc_bound: a.trunc_bound + b.trunc_bound,
        low_confidence: a.low_confidence || b.low_confidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn reference() -> AlphaSchedule {
        AlphaSchedule::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.9]).unwrap()
    }

    fn lambda1() -> Rate {
        Rate::new(1.0).unwrap()
    }

    /// Independent pgf-coefficient oracle: extracts `p_m` from the segment
    /// pgf `exp(−a (1−u)^α)` by Cauchy-integral quadrature on `|u| = ρ`.
    fn pgf_coefficient_oracle(alpha: f64, a: f64, m: usize) -> f64 {
        let rho = 0.5f64;
        let n = 4096;
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let u = Complex64::from_polar(rho, theta);
            let psi = (-(a * (Complex64::new(1.0, 0.0) - u).powf(alpha))).exp();
            sum += psi * Complex64::from_polar(rho.powi(m as i32).recip(), -(m as f64) * theta);
        }
        (sum / n as f64).re
    }

    #[test]
    fn segment_pmf_at_zero_is_exponential() {
        let p0 = pmf_segment(0.5, lambda1(), 1.0, 0, &SeriesParams::default()).unwrap();
        assert_relative_eq!(p0, (-1.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn segment_pmf_poisson_collapse() {
        let params = SeriesParams::default();
        let p2 = pmf_segment(1.0, lambda1(), 1.0, 2, &params).unwrap();
        assert_relative_eq!(p2, (-1.0f64).exp() / 2.0, epsilon = 1e-10);
        for m in 0..10 {
            let expect = (-2.0f64).exp() * 2.0f64.powi(m as i32)
                / (1..=m).map(|k| k as f64).product::<f64>().max(1.0);
            let got = pmf_segment(1.0, lambda1(), 2.0, m, &params).unwrap();
            assert_relative_eq!(got, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn segment_pmf_matches_pgf_coefficients() {
        let params = SeriesParams::default();
        for m in 0..8 {
            let got = pmf_segment(0.5, lambda1(), 1.0, m, &params).unwrap();
            let oracle = pgf_coefficient_oracle(0.5, 1.0, m);
            assert!(
                (got - oracle).abs() <= 1e-6,
                "m={m}: series {got} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn segment_pmf_rejects_bad_input() {
        let params = SeriesParams::default();
        assert!(pmf_segment(0.0, lambda1(), 1.0, 0, &params).is_err());
        assert!(pmf_segment(0.5, lambda1(), 0.0, 0, &params).is_err());
        assert!(matches!(
            pmf_segment(0.5, lambda1(), 1.0, 0, &SeriesParams { r_max: 0, ..params }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn segment_series_reports_truncation_failure() {
        // a huge mean with a tiny r_max cannot meet the tolerance
        let params = SeriesParams {
            r_max: 5,
            ..SeriesParams::default()
        };
        let big = Rate::new(50.0).unwrap();
        assert!(matches!(
            pmf_segment(0.9, big, 1.0, 4, &params),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn series_initial_condition() {
        let params = SeriesParams::default();
        assert_eq!(pmf_series(&reference(), lambda1(), 0.0, 0, &params).unwrap(), 1.0);
        assert_eq!(pmf_series(&reference(), lambda1(), 0.0, 3, &params).unwrap(), 0.0);
    }

    #[test]
    fn series_state_zero_closed_form() {
        let params = SeriesParams::default();
        let p0 = pmf_series(&reference(), lambda1(), 1.0, 0, &params).unwrap();
        assert_relative_eq!(p0, (-1.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn series_single_segment_agrees_with_segment() {
        let params = SeriesParams::default();
        let sched = AlphaSchedule::constant(0.7, 1.0).unwrap();
        for m in 0..10 {
            let a = pmf_series(&sched, lambda1(), 1.0, m, &params).unwrap();
            let b = pmf_segment(0.7, lambda1(), 1.0, m, &params).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn series_agrees_with_convolution_oracle() {
        let params = SeriesParams::default();
        let conv = pmf_convolution(&reference(), lambda1(), 1.0, &params).unwrap();
        for m in 0..=10 {
            let s = pmf_series(&reference(), lambda1(), 1.0, m, &params).unwrap();
            assert!(
                (s - conv.probs[m]).abs() <= 1e-6,
                "m={m}: series {s} vs convolution {}",
                conv.probs[m]
            );
        }
    }

    #[test]
    fn convolution_three_segments_oracle() {
        let params = SeriesParams::default();
        let sched =
            AlphaSchedule::new(vec![0.0, 0.3, 0.7, 1.0], vec![0.4, 0.6, 0.95]).unwrap();
        let conv = pmf_convolution(&sched, lambda1(), 1.0, &params).unwrap();
        for m in 0..=10 {
            let s = pmf_series(&sched, lambda1(), 1.0, m, &params).unwrap();
            assert!((s - conv.probs[m]).abs() <= 1e-6, "m={m}");
        }
    }

    #[test]
    fn convolution_poisson_additivity() {
        // α ≡ 1 over two unit segments is Poisson(2)
        let params = SeriesParams::default();
        let sched = AlphaSchedule::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0]).unwrap();
        let table = pmf_convolution(&sched, lambda1(), 2.0, &params).unwrap();
        assert_relative_eq!(table.probs[0], (-2.0f64).exp(), epsilon = 1e-10);
        assert_relative_eq!(table.probs[3], (-2.0f64).exp() * 8.0 / 6.0, epsilon = 1e-9);
        assert!(!table.low_confidence);
    }

    #[test]
    fn convolution_single_segment_identity() {
        let params = SeriesParams::default();
        let sched = AlphaSchedule::constant(0.6, 1.0).unwrap();
        let table = pmf_convolution(&sched, lambda1(), 1.0, &params).unwrap();
        for m in 0..=params.m_max {
            let direct = pmf_segment(0.6, lambda1(), 1.0, m, &params).unwrap();
            assert_relative_eq!(table.probs[m], direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn convolution_normalizes() {
        let params = SeriesParams::default();
        let table = pmf_convolution(&reference(), lambda1(), 1.0, &params).unwrap();
        let total = table.total();
        assert!(total <= 1.0 + params.tol, "total {total}");
        assert!(total + table.trunc_bound >= 1.0, "total {total} bound {}", table.trunc_bound);
        assert!(table.probs.iter().all(|&p| (-params.tol..=1.0 + params.tol).contains(&p)));
    }

    #[test]
    fn convolution_flags_low_confidence_outside_validity_region() {
        let params = SeriesParams {
            r_max: 400,
            ..SeriesParams::default()
        };
        let sched = AlphaSchedule::constant(0.8, 1.0).unwrap();
        let table = pmf_convolution(&sched, Rate::new(4.0).unwrap(), 1.0, &params).unwrap();
        assert!(table.low_confidence);
    }

    #[test]
    fn pgf_pmf_duality() {
        let params = SeriesParams::default();
        let table = pmf_convolution(&reference(), lambda1(), 1.0, &params).unwrap();
        for &u in &[0.0f64, 0.3, 0.7] {
            let series_sum: f64 = table
                .probs
                .iter()
                .enumerate()
                .map(|(m, &p)| u.powi(m as i32) * p)
                .sum();
            let closed = super::super::pgf(&reference(), lambda1(), 1.0, u).unwrap();
            assert!(
                (series_sum - closed).abs() <= table.trunc_bound + 1e-9,
                "u={u}: {series_sum} vs {closed}"
            );
        }
    }
}
