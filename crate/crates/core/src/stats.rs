//! Small statistics helpers for the experiment reports: empirical
//! quantiles, a two-sample Kolmogorov-Smirnov test, and a least-squares
//! slope through the origin for the flooding tail fit.

/// Smallest sample value whose empirical CDF reaches `p` (0 < p <= 1).
pub fn quantile(samples: &[u64], p: f64) -> u64 {
    assert!(!samples.is_empty() && p > 0.0 && p <= 1.0);
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.saturating_sub(1)]
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 points.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Standard error of the difference of two sample means.
pub fn pooled_se(a: &[f64], b: &[f64]) -> f64 {
    let va = sample_std(a).powi(2) / a.len() as f64;
    let vb = sample_std(b).powi(2) / b.len() as f64;
    (va + vb).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl KsResult {
    /// True when the samples are NOT distinguished at the given level.
    pub fn accepts_equality(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value. On tied
/// integer data the test is conservative, which is the safe direction for an
/// equality check.
pub fn ks_two_sample(a: &[u64], b: &[u64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable();
    ys.sort_unstable();
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        let fa = i as f64 / na;
        let fb = j as f64 / nb;
        d = d.max((fa - fb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    KsResult {
        statistic: d,
        p_value: kolmogorov_tail(lambda),
    }
}

/// Q(lambda) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2).
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-9 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Least-squares slope of `y = s * x` through the origin, plus residuals.
pub fn slope_through_origin(points: &[(f64, f64)]) -> (f64, Vec<f64>) {
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let residuals = points.iter().map(|(x, y)| y - slope * x).collect();
    (slope, residuals)
}
