//! End-to-end simulation of the subordinated counting process and the
//! Monte Carlo side of every analytic check.
//!
//! Heavy tails make huge Poisson means routine for small α: a draw whose
//! subordinator value (or mean `λS`) exceeds the Poisson sampler's safe
//! range is tallied in `n_overflow` and excluded from counts, never
//! silently dropped. Batches are split across workers by contiguous index
//! ranges with per-worker RNG streams, so merged results are deterministic
//! and independent of thread scheduling.

use rand::distributions::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::PmfTable;
use crate::rng::RngSpec;
use crate::schedule::{AlphaSchedule, Rate};
use crate::stable::sample_voss_at;
use crate::stats::{chi_square_gof, ChiSquareResult};
use crate::{Error, Result};

/// Largest Poisson mean the sampler accepts; beyond it the draw is routed
/// to the overflow tally.
pub const POISSON_SAFE_MEAN: f64 = 1e12;

/// Seeded Monte Carlo counts of the process at a fixed time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationBatch {
    /// Canonical description of the experiment the counts came from.
    pub schedule_digest: String,
    pub counts: Vec<u64>,
    pub n_overflow: usize,
    pub rng: RngSpec,
}

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

fn digest(schedule: &AlphaSchedule, lambda: Rate, t: f64, tag: &str) -> String {
    let segs: Vec<String> = schedule
        .boundaries()
        .windows(2)
        .zip(schedule.orders())
        .map(|(w, a)| format!("({},{a})", w[1] - w[0]))
        .collect();
    format!("{tag}:segments=[{}];lambda={};t={t}", segs.join(","), lambda.get())
}

/// Poisson draw with mean `mu`. Sequential-search inversion for small
/// means, transformed rejection (via `rand_distr`) for large ones. `None`
/// marks an overflow: non-finite `mu` or `mu` beyond [`POISSON_SAFE_MEAN`].
pub fn sample_poisson<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Option<u64> {
    if !mu.is_finite() || mu > POISSON_SAFE_MEAN {
        return None;
    }
    if mu <= 0.0 {
        return Some(0);
    }
    if mu <= 30.0 {
        let l = (-mu).exp();
        let mut k = 0u64;
        let mut p = 1.0;
        loop {
            p *= rng.gen::<f64>();
            if p <= l {
                return Some(k);
            }
            k += 1;
        }
    }
    let dist = rand_distr::Poisson::new(mu).expect("mu checked positive and finite");
    Some(dist.sample(rng) as u64)
}

fn worker_ranges(n: usize, workers: usize) -> Vec<usize> {
    let workers = workers.max(1).min(n);
    let base = n / workers;
    let rem = n % workers;
    (0..workers).map(|w| base + usize::from(w < rem)).collect()
}

/// Runs `per_sample` n times split across workers, each worker on its own
/// RNG stream, and merges per-worker results in worker order.
fn run_workers<T, F>(n: usize, workers: usize, rng: RngSpec, per_sample: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha12Rng) -> T + Sync,
{
    let sizes = worker_ranges(n, workers);
    let mut per_worker: Vec<Vec<T>> = sizes
        .par_iter()
        .enumerate()
        .map(|(w, &size)| {
            let mut local = rng.stream(rng.stream_id.wrapping_add(w as u64)).build();
            (0..size).map(|_| per_sample(&mut local)).collect()
        })
        .collect();
    let mut merged = Vec::with_capacity(n);
    for chunk in per_worker.iter_mut() {
        merged.append(chunk);
    }
    merged
}

/// Direct simulation of the process: `S = ` subordinator at `t`, then a
/// Poisson draw with mean `λ S`.
pub fn simulate_gsfpp(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t: f64,
    n: usize,
    rng: RngSpec,
    workers: usize,
) -> Result<SimulationBatch> {
    if n < 1 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let draws = run_workers(n, workers, rng, |local| {
        let s = sample_voss_at(schedule, t, local).expect("validated inputs");
        sample_poisson(lambda.get() * s, local)
    });
    Ok(collect_batch(draws, digest(schedule, lambda, t, "gsfpp"), rng))
}

/// Simulation through the distributional identity: independent per-segment
/// subordinated counts, summed. Same law as [`simulate_gsfpp`].
pub fn simulate_segment_sum(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t: f64,
    n: usize,
    rng: RngSpec,
    workers: usize,
) -> Result<SimulationBatch> {
    if n < 1 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let segments = schedule.clipped_segments(t)?;
    let draws = run_workers(n, workers, rng, |local| {
        let mut total = 0u64;
        for &(len, alpha) in &segments {
            let s = crate::stable::sample_stable_increment(alpha, len, local)
                .expect("validated inputs");
            match sample_poisson(lambda.get() * s, local) {
                Some(c) => total += c,
                None => return None,
            }
        }
        Some(total)
    });
    Ok(collect_batch(draws, digest(schedule, lambda, t, "segment-sum"), rng))
}

fn collect_batch(draws: Vec<Option<u64>>, schedule_digest: String, rng: RngSpec) -> SimulationBatch {
    let mut counts = Vec::with_capacity(draws.len());
    let mut n_overflow = 0;
    for d in draws {
        match d {
            Some(c) => counts.push(c),
            None => n_overflow += 1,
        }
    }
    SimulationBatch {
        schedule_digest,
        counts,
        n_overflow,
        rng,
    }
}

impl SimulationBatch {
    /// Fraction of requested samples that overflowed.
    pub fn overflow_fraction(&self) -> f64 {
        let total = self.counts.len() + self.n_overflow;
        self.n_overflow as f64 / total as f64
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64).sum::<f64>() / self.counts.len() as f64
    }

    /// Histogram with a capped support: counts at or above `cap`, and
    /// overflowed draws, land in the final bin. Heavy tails make the raw
    /// maximum count unbounded, so histograms must never be sized by it.
    pub fn histogram(&self, cap: usize) -> Vec<u64> {
        let mut hist = vec![0u64; cap + 1];
        for &c in &self.counts {
            hist[(c as usize).min(cap)] += 1;
        }
        hist[cap] += self.n_overflow as u64;
        hist
    }
}

/// Empirical frequencies of a batch for states `0..=m_max`. Mass beyond
/// `m_max`, plus the overflow tally, lands in the table's tail bucket
/// (`trunc_bound`), so the buckets always sum to one.
pub fn empirical_pmf(batch: &SimulationBatch, m_max: usize) -> Result<PmfTable> {
    let total = batch.counts.len() + batch.n_overflow;
    if total == 0 {
        return Err(Error::Degenerate("empty batch".into()));
    }
    let mut hist = vec![0usize; m_max + 1];
    let mut beyond = batch.n_overflow;
    for &c in &batch.counts {
        if (c as usize) <= m_max {
            hist[c as usize] += 1;
        } else {
            beyond += 1;
        }
    }
    Ok(PmfTable {
        probs: hist.iter().map(|&h| h as f64 / total as f64).collect(),
        trunc_bound: beyond as f64 / total as f64,
        low_confidence: false,
    })
}

/// Pearson chi-square of an empirical table against an analytic one, with
/// the mass beyond `m_max` pooled into one tail cell on both sides. The
/// empirical tail cell includes overflowed draws, counted against the
/// analytic tail mass.
pub fn chi_square_compare(
    empirical: &PmfTable,
    analytic: &PmfTable,
    n: usize,
) -> Result<ChiSquareResult> {
    let nf = n as f64;
    let mut observed: Vec<f64> = empirical.probs.iter().map(|&p| p * nf).collect();
    observed.push(empirical.trunc_bound * nf);
    let mut expected: Vec<f64> = analytic.probs.iter().map(|&p| p * nf).collect();
    expected.push((1.0 - analytic.total()).max(0.0) * nf);
    chi_square_gof(&observed, &expected)
}

/// Monte Carlo estimate of the subordinator Laplace transform
/// `E[e^{−wS(t)}]`, with its standard error.
pub fn laplace_mc(
    schedule: &AlphaSchedule,
    t: f64,
    w: f64,
    n: usize,
    rng: RngSpec,
    workers: usize,
) -> Result<McEstimate> {
    if n < 1 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("argument must be nonnegative, got {w}")));
    }
    let values = run_workers(n, workers, rng, |local| {
        let s = sample_voss_at(schedule, t, local).expect("validated inputs");
        // e^{-w·∞} = 0 is a legitimate contribution here
        (-w * s).exp()
    });
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    Ok(McEstimate {
        estimate: mean,
        standard_error: (var / nf).sqrt(),
    })
}

/// Empirical hitting probabilities `P{ξ(t) ≥ k}` on a time grid, from
/// coupled paths: each sample walks one subordinator path and accumulates
/// Poisson increments, so its indicator is nondecreasing across the grid
/// and so are the aggregated estimates.
pub fn hitting_mc(
    schedule: &AlphaSchedule,
    lambda: Rate,
    t_grid: &[f64],
    k: u64,
    n: usize,
    rng: RngSpec,
    workers: usize,
) -> Result<Vec<McEstimate>> {
    if n < 1 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    if k < 1 {
        return Err(Error::Domain("hitting level k must be at least 1".into()));
    }
    if t_grid.is_empty() || !t_grid.windows(2).all(|w| w[0] < w[1]) || t_grid[0] < 0.0 {
        return Err(Error::Domain("t_grid must be nonnegative and increasing".into()));
    }
    let hits = run_workers(n, workers, rng, |local| {
        let mut hit = vec![false; t_grid.len()];
        let mut count = 0u64;
        let mut prev_t = 0.0;
        for (i, &t) in t_grid.iter().enumerate() {
            if t > prev_t {
                let restricted = schedule.restrict(prev_t, t).expect("validated grid");
                let ds = sample_voss_at(&restricted, t - prev_t, local).expect("validated");
                // an overflowing increment saturates the count; the level is
                // certainly reached
                count = match sample_poisson(lambda.get() * ds, local) {
                    Some(c) => count.saturating_add(c),
                    None => u64::MAX,
                };
                prev_t = t;
            }
            hit[i] = count >= k;
        }
        hit
    });
    let nf = n as f64;
    Ok((0..t_grid.len())
        .map(|i| {
            let p = hits.iter().filter(|h| h[i]).count() as f64 / nf;
            McEstimate {
                estimate: p,
                standard_error: (p * (1.0 - p) / nf).sqrt(),
            }
        })
        .collect())
}
