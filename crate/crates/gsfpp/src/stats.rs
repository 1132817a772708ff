//! Goodness-of-fit machinery: Pearson chi-square (one- and two-sample, with
//! bin pooling) and Kolmogorov-Smirnov tests with asymptotic p-values.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Outcome of a chi-square comparison.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of pooled bins actually used.
    pub bins: usize,
}

/// Outcome of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2 k² x²)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Jacobi-theta dual form; the alternating series converges far too
        // slowly for small x
        let mut cdf = 0.0;
        for k in 1..101 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
            cdf += term;
            if term < 1e-18 * cdf {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / x;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..101 {
        let term = sign * (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    // Stephens' finite-sample correction to the asymptotic distribution
    let sqrt_n = effective_n.sqrt();
    kolmogorov_sf(d * (sqrt_n + 0.12 + 0.11 / sqrt_n))
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsResult {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        if sa[i] <= sb[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let effective = na * nb / (na + nb);
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, effective),
    }
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let chi = ChiSquared::new(dof as f64).expect("dof > 0");
    1.0 - chi.cdf(statistic)
}

/// Pools adjacent cells until every expected count reaches `min_expected`.
/// Returns `(observed, expected)` per pooled bin; a trailing underfilled
/// pool is merged into its predecessor.
fn pool_bins(observed: &[f64], expected: &[f64], min_expected: f64) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= min_expected {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
            *lo += o_acc;
            *le += e_acc;
        } else {
            obs.push(o_acc);
            exp.push(e_acc);
        }
    }
    (obs, exp)
}

/// Pearson chi-square of observed counts against expected counts (already
/// on the same cells, tail cell included). Cells are pooled so every
/// expected count is at least 5.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> Result<ChiSquareResult> {
    let (obs, exp) = pool_bins(observed, expected, 5.0);
    if obs.len() < 2 {
        return Err(Error::Degenerate(format!(
            "chi-square needs at least 2 pooled bins, got {}",
            obs.len()
        )));
    }
    let statistic: f64 = obs
        .iter()
        .zip(&exp)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum();
    let dof = obs.len() - 1;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
        bins: obs.len(),
    })
}

/// Two-sample chi-square test of homogeneity on integer counts. Expected
/// counts come from the pooled sample; cells are pooled so every pooled
/// expected count is at least 5.
pub fn chi_square_two_sample(counts_a: &[u64], counts_b: &[u64]) -> Result<ChiSquareResult> {
    let len = counts_a.len().max(counts_b.len());
    let mut hist_a = vec![0.0; len];
    let mut hist_b = vec![0.0; len];
    for (i, &c) in counts_a.iter().enumerate() {
        hist_a[i] = c as f64;
    }
    for (i, &c) in counts_b.iter().enumerate() {
        hist_b[i] = c as f64;
    }
    let na: f64 = hist_a.iter().sum();
    let nb: f64 = hist_b.iter().sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("empty sample in two-sample test".into()));
    }
    // pool on the combined expected count, then split proportionally
    let combined: Vec<f64> = hist_a.iter().zip(&hist_b).map(|(a, b)| a + b).collect();
    let scale_a = na / (na + nb);
    let scale_b = nb / (na + nb);
    let (pooled_a, pooled_comb) = pool_bins(&hist_a, &combined, 5.0 / scale_a.min(scale_b));
    let (pooled_b, _) = pool_bins(&hist_b, &combined, 5.0 / scale_a.min(scale_b));
    if pooled_comb.len() < 2 {
        return Err(Error::Degenerate(format!(
            "two-sample chi-square needs at least 2 pooled bins, got {}",
            pooled_comb.len()
        )));
    }
    let mut statistic = 0.0;
    for ((&oa, &ob), &c) in pooled_a.iter().zip(&pooled_b).zip(&pooled_comb) {
        let ea = scale_a * c;
        let eb = scale_b * c;
        statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let dof = pooled_comb.len() - 1;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
        bins: pooled_comb.len(),
    })
}
