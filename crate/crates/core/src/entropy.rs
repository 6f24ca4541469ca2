//! Permutation entropy, its quadratic approximation near white noise, and the
//! scaled deviation `Z = T (log m! - H)`.
//!
//! Entropies are in nats. Divide by `ln 2` for bits.

use crate::contrasts::PatternDistribution;
use crate::error::{Error, Result};
use crate::patterns::{count_patterns, factorial, PatternCounts, TiePolicy, TimeSeries, WindowSpec};

/// Shortest series accepted by [`z_statistic`]; below this the pattern counts
/// are too coarse for the null quantiles to apply.
pub const MIN_TEST_LEN: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub m: usize,
    /// `-sum p log p`.
    pub h: f64,
    /// `log m!`.
    pub h_max: f64,
    /// `h_max - h`.
    pub deviation: f64,
    /// `(m!/2) Delta^2`, the second-order approximation of `deviation`.
    pub taylor_deviation: f64,
    /// `windows * deviation`, present when computed from a series.
    pub z: Option<f64>,
    /// Number of counted (tie-free) windows, the sample size that scales `z`.
    pub windows: Option<usize>,
    pub series_len: Option<usize>,
}

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn shannon(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

/// Permutation entropy `H = -sum p_pi ln p_pi` and related quantities.
pub fn permutation_entropy(dist: &PatternDistribution) -> EntropyReport {
    let m = dist.m();
    let h = shannon(dist.probs());
    let h_max = (factorial(m) as f64).ln();
    EntropyReport {
        m,
        h,
        h_max,
        deviation: (h_max - h).max(0.0),
        taylor_deviation: factorial(m) as f64 / 2.0 * dist.distance2_to_white_noise(),
        z: None,
        windows: None,
        series_len: None,
    }
}

/// `log m! - (m!/2) Delta^2`.
pub fn taylor_entropy(dist: &PatternDistribution) -> f64 {
    let n = factorial(dist.m()) as f64;
    n.ln() - n / 2.0 * dist.distance2_to_white_noise()
}

/// `log m! - H` straight from pattern counts.
pub(crate) fn deviation_from_counts(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    // H = ln n - (1/n) sum c ln c
    let s: f64 = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 * (c as f64).ln()).sum();
    let h = nf.ln() - s / nf;
    ((counts.len() as f64).ln() - h).max(0.0)
}

/// `Z` from counts, scaled by the series length the counts came from.
pub fn z_from_counts(counts: &PatternCounts) -> Result<EntropyReport> {
    let dist = PatternDistribution::from_counts(counts)?;
    let mut report = permutation_entropy(&dist);
    // Z is scaled by the number of patterns actually counted; this is the
    // convention under which the published null quantiles are reproduced
    let n = counts.valid() as usize;
    report.z = Some(n as f64 * report.deviation);
    report.windows = Some(n);
    report.series_len = Some(counts.series_len);
    Ok(report)
}

/// Permutation entropy of a series together with `Z = N (log m! - H)`,
/// `N` being the number of counted windows.
pub fn z_statistic(x: &TimeSeries, m: usize, d: usize, ties: TiePolicy) -> Result<EntropyReport> {
    if x.len() < MIN_TEST_LEN {
        return Err(Error::SeriesTooShort { len: x.len(), needed: MIN_TEST_LEN });
    }
    let w = WindowSpec::new(m, d)?;
    z_from_counts(&count_patterns(x, w, ties)?)
}
