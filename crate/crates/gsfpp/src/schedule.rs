//! Piecewise-constant order functions and their deterministic functionals.
//!
//! An [`AlphaSchedule`] describes the stability index `α(t)`: a partition
//! `0 = t_0 < t_1 < ... < t_n` with a constant order `α_k ∈ (0, 1]` on each
//! `[t_{k-1}, t_k)`. The last segment extends to infinity. Everything here
//! is a pure function of immutable values.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Piecewise-constant stability index `α(·)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    boundaries: Vec<f64>,
    orders: Vec<f64>,
}

/// Rate parameter of the underlying Poisson process, `λ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(f64);

impl Rate {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("rate must be positive, got {lambda}")));
        }
        Ok(Rate(lambda))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl AlphaSchedule {
    /// Builds a schedule from explicit partition points and per-segment orders.
    ///
    /// `boundaries` must be strictly increasing and start at exactly 0;
    /// `orders` must have one entry per segment, each in `(0, 1]`.
    pub fn new(boundaries: Vec<f64>, orders: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::Domain(
                "schedule needs at least two boundaries (one segment)".into(),
            ));
        }
        if boundaries[0] != 0.0 {
            return Err(Error::Domain(format!(
                "first boundary must be exactly 0, got {}",
                boundaries[0]
            )));
        }
        if !boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain("boundaries must be strictly increasing".into()));
        }
        if !boundaries.iter().all(|b| b.is_finite()) {
            return Err(Error::Domain("boundaries must be finite".into()));
        }
        if orders.len() != boundaries.len() - 1 {
            return Err(Error::Domain(format!(
                "expected {} orders for {} boundaries, got {}",
                boundaries.len() - 1,
                boundaries.len(),
                orders.len()
            )));
        }
        if let Some(bad) = orders.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::Domain(format!("orders must lie in (0, 1], got {bad}")));
        }
        Ok(AlphaSchedule { boundaries, orders })
    }

    /// Builds a schedule from `(duration, alpha)` pairs, the config-file form.
    pub fn from_segments(segments: &[(f64, f64)]) -> Result<Self> {
        if segments.iter().any(|&(d, _)| !(d > 0.0)) {
            return Err(Error::Domain("segment durations must be positive".into()));
        }
        let mut boundaries = Vec::with_capacity(segments.len() + 1);
        boundaries.push(0.0);
        let mut acc = 0.0;
        for &(d, _) in segments {
            acc += d;
            boundaries.push(acc);
        }
        let orders = segments.iter().map(|&(_, a)| a).collect();
        Self::new(boundaries, orders)
    }

    /// Constant-order schedule on `[0, horizon)`.
    pub fn constant(alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![alpha])
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn num_segments(&self) -> usize {
        self.orders.len()
    }

    /// Last partition point `t_n`; the final order extends beyond it.
    pub fn horizon(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    /// The order in force at time `t`. Right-continuous at boundaries; past
    /// the last boundary the final segment's order applies.
    pub fn alpha_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        // boundaries[k] <= t < boundaries[k+1] selects orders[k]
        let k = match self
            .boundaries
            .iter()
            .rposition(|&b| b <= t)
        {
            Some(k) => k.min(self.orders.len() - 1),
            None => 0,
        };
        Ok(self.orders[k])
    }

    /// Restriction of the schedule to `[s, r)`, shifted to start at 0.
    ///
    /// The result covers `[0, r - s)` with the same orders the original
    /// schedule takes on `[s, r)`.
    pub fn restrict(&self, s: f64, r: f64) -> Result<AlphaSchedule> {
        if !(0.0 <= s && s < r) {
            return Err(Error::Domain(format!(
                "restriction interval must satisfy 0 <= s < r, got [{s}, {r})"
            )));
        }
        let mut boundaries = vec![0.0];
        let mut orders = Vec::new();
        for (k, &alpha) in self.orders.iter().enumerate() {
            let lo = self.boundaries[k].max(s);
            // last segment extends to infinity
            let hi = if k + 1 == self.orders.len() {
                r
            } else {
                self.boundaries[k + 1].min(r)
            };
            if hi > lo {
                boundaries.push(*boundaries.last().unwrap() + (hi - lo));
                orders.push(alpha);
            }
        }
        AlphaSchedule::new(boundaries, orders)
    }

    /// Segments of the schedule clipped to `[0, t]`, as `(length, alpha)`
    /// pairs. The building block for every per-segment formula.
    pub fn clipped_segments(&self, t: f64) -> Result<Vec<(f64, f64)>> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("clip time must be positive, got {t}")));
        }
        let clipped = self.restrict(0.0, t)?;
        Ok(clipped
            .boundaries
            .windows(2)
            .zip(clipped.orders.iter())
            .map(|(w, &a)| (w[1] - w[0], a))
            .collect())
    }

    /// The exponent integral `∫₀ᵗ w^{α(s)} ds = Σ_k w^{α_k} Δt_k` over the
    /// schedule clipped to `[0, t]`.
    pub fn exponent_integral(&self, t: f64, w: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        if !(w >= 0.0) {
            return Err(Error::Domain(format!("argument must be nonnegative, got {w}")));
        }
        if t == 0.0 || w == 0.0 {
            // 0^α = 0 for every α > 0
            return Ok(0.0);
        }
        let mut acc = 0.0;
        for (len, alpha) in self.clipped_segments(t)? {
            acc += len * w.powf(alpha);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_seg() -> AlphaSchedule {
        AlphaSchedule::new(vec![0.0, 1.0, 2.0], vec![0.5, 0.8]).unwrap()
    }

    #[test]
    fn alpha_at_is_right_continuous() {
        let s = two_seg();
        assert_eq!(s.alpha_at(1.0).unwrap(), 0.8);
        assert_eq!(s.alpha_at(0.0).unwrap(), 0.5);
        assert_eq!(s.alpha_at(5.0).unwrap(), 0.8);
        assert_eq!(s.alpha_at(0.999).unwrap(), 0.5);
    }

    #[test]
    fn alpha_at_rejects_negative_time() {
        assert!(two_seg().alpha_at(-0.1).is_err());
    }

    #[test]
    fn restrict_intersects_and_shifts() {
        let s = two_seg();
        let r = s.restrict(0.5, 1.5).unwrap();
        assert_eq!(r.boundaries(), &[0.0, 0.5, 1.0]);
        assert_eq!(r.orders(), &[0.5, 0.8]);

        let id = AlphaSchedule::new(vec![0.0, 1.0], vec![0.6]).unwrap();
        assert_eq!(id.restrict(0.0, 1.0).unwrap(), id);

        let single = s.restrict(1.2, 1.7).unwrap();
        assert_eq!(single.boundaries(), &[0.0, 0.5]);
        assert_eq!(single.orders(), &[0.8]);
    }

    #[test]
    fn restrict_rejects_empty_interval() {
        assert!(two_seg().restrict(1.0, 1.0).is_err());
        assert!(two_seg().restrict(2.0, 1.0).is_err());
    }

    #[test]
    fn exponent_integral_examples() {
        let one = AlphaSchedule::new(vec![0.0, 1.0], vec![0.5]).unwrap();
        assert_relative_eq!(one.exponent_integral(1.0, 4.0).unwrap(), 2.0);
        assert_eq!(one.exponent_integral(1.0, 0.0).unwrap(), 0.0);

        let s = AlphaSchedule::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.9]).unwrap();
        assert_relative_eq!(s.exponent_integral(1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(AlphaSchedule::new(vec![0.5, 1.0], vec![0.5]).is_err());
        assert!(AlphaSchedule::new(vec![0.0, 1.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(AlphaSchedule::new(vec![0.0, 1.0], vec![1.5]).is_err());
        assert!(AlphaSchedule::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(AlphaSchedule::new(vec![0.0], vec![]).is_err());
        assert!(Rate::new(0.0).is_err());
        assert!(Rate::new(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn restrict_preserves_total_measure(
            s in 0.0f64..3.0,
            len in 0.01f64..3.0,
        ) {
            let sched = two_seg();
            let r = sched.restrict(s, s + len).unwrap();
            let total: f64 = r.boundaries().windows(2).map(|w| w[1] - w[0]).sum();
            prop_assert!((total - len).abs() <= 1e-12 * (1.0 + len));
        }

        #[test]
        fn exponent_integral_additive_over_splits(
            split in 0.05f64..1.95,
            w in 0.0f64..4.0,
        ) {
            let sched = two_seg();
            let t = 2.0;
            let whole = sched.exponent_integral(t, w).unwrap();
            let head = sched.exponent_integral(split, w).unwrap();
            let tail = sched
                .restrict(split, t)
                .unwrap()
                .exponent_integral(t - split, w)
                .unwrap();
            prop_assert!((whole - (head + tail)).abs() <= 1e-10);
        }

        #[test]
        fn exponent_integral_monotone(
            t1 in 0.0f64..2.0,
            dt in 0.0f64..2.0,
            w in 0.0f64..4.0,
            dw in 0.0f64..4.0,
        ) {
            let sched = two_seg();
            let base = sched.exponent_integral(t1, w).unwrap();
            prop_assert!(sched.exponent_integral(t1 + dt, w).unwrap() >= base);
            prop_assert!(sched.exponent_integral(t1, w + dw).unwrap() >= base);
        }

        #[test]
        fn single_segment_matches_constant_order(
            alpha in 0.1f64..1.0,
            t in 0.01f64..5.0,
            w in 0.0f64..4.0,
        ) {
            let sched = AlphaSchedule::constant(alpha, 1.0).unwrap();
            let expect = if w == 0.0 { 0.0 } else { t * w.powf(alpha) };
            let got = sched.exponent_integral(t, w).unwrap();
            prop_assert!((got - expect).abs() <= 1e-12 * (1.0 + expect));
        }
    }
}
