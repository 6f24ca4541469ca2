//! Pattern frequencies and the four length-3 pattern contrasts.
//!
//! For `m = 3` the frequency vector is ordered `123, 132, 213, 231, 312, 321`.
//! The contrasts are the inner products with
//!
//! ```text
//! beta  = ( 1,    0,    0,    0,    0,   -1  )
//! tau   = ( 2/3, -1/3, -1/3, -1/3, -1/3,  2/3)
//! gamma = ( 0,   -1,    1,    1,   -1,    0  )
//! delta = ( 0,    1,    1,   -1,   -1,    0  )
//! ```
//!
//! which together with the constraint directions `(1,1,1,1,1,1)` and
//! `(0,-1,1,-1,1,0)` form an orthogonal basis of R^6. Hence
//! `4 |p - q|^2 = 3 dtau^2 + 2 dbeta^2 + dgamma^2 + ddelta^2` for any two
//! distributions that satisfy both constraints.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::patterns::{count_patterns, factorial, PatternCounts, TiePolicy, TimeSeries, WindowSpec};

/// Tolerance for the normalization and stationarity constraints.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Contrast weight vectors over `123, 132, 213, 231, 312, 321`.
pub const BETA_WEIGHTS: [f64; 6] = [1.0, 0.0, 0.0, 0.0, 0.0, -1.0];
pub const TAU_WEIGHTS: [f64; 6] = [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0];
pub const GAMMA_WEIGHTS: [f64; 6] = [0.0, -1.0, 1.0, 1.0, -1.0, 0.0];
pub const DELTA_WEIGHTS: [f64; 6] = [0.0, 1.0, 1.0, -1.0, -1.0, 0.0];
/// Normalization constraint direction.
pub const C1: [f64; 6] = [1.0; 6];
/// Stationarity constraint direction: `p213 + p312 - p231 - p132`.
pub const C2: [f64; 6] = [0.0, -1.0, 1.0, -1.0, 1.0, 0.0];

/// Where a distribution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    /// Relative frequencies from `windows` counted windows of a series.
    Empirical { windows: u64 },
    /// Probabilities of a model.
    Model,
}

/// Probability vector over the `m!` patterns of length `m`, lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternDistribution {
    m: usize,
    probs: Vec<f64>,
    kind: DistributionKind,
}

impl PatternDistribution {
    /// Model distribution; checks length, nonnegativity and normalization.
    pub fn new(m: usize, probs: Vec<f64>) -> Result<Self> {
        Self::with_kind(m, probs, DistributionKind::Model)
    }

    fn with_kind(m: usize, probs: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        if !(1..=10).contains(&m) {
            return Err(Error::UnsupportedLength { m, min: 1, max: 10 });
        }
        if probs.len() != factorial(m) {
            return Err(Error::InvalidParameter(format!(
                "expected {} probabilities for m={m}, got {}",
                factorial(m),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::ConstraintViolation(format!("negative or non-finite probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > CONSTRAINT_TOL * (probs.len() as f64).max(1.0) {
            return Err(Error::ConstraintViolation(format!("probabilities sum to {total}")));
        }
        Ok(Self { m, probs, kind })
    }

    /// Uniform (white-noise) distribution on `S_m`.
    pub fn uniform(m: usize) -> Self {
        let n = factorial(m);
        Self { m, probs: vec![1.0 / n as f64; n], kind: DistributionKind::Model }
    }

    /// Length-3 law of symmetric random walk: `(1/4, 1/8, 1/8, 1/8, 1/8, 1/4)`.
    pub fn random_walk3() -> Self {
        Self {
            m: 3,
            probs: vec![0.25, 0.125, 0.125, 0.125, 0.125, 0.25],
            kind: DistributionKind::Model,
        }
    }

    /// Relative frequencies from counts; the denominator is the number of
    /// counted (non-skipped) windows.
    pub fn from_counts(counts: &PatternCounts) -> Result<Self> {
        let valid = counts.valid();
        if valid == 0 {
            return Err(Error::AllWindowsTied);
        }
        let probs = counts.counts.iter().map(|&c| c as f64 / valid as f64).collect();
        Self::with_kind(counts.m, probs, DistributionKind::Empirical { windows: valid })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Probability of the pattern with the given lexicographic index.
    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Squared Euclidean distance to the uniform distribution.
    pub fn distance2_to_white_noise(&self) -> f64 {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().map(|p| (p - u).powi(2)).sum()
    }

    /// `p213 + p312 - p231 - p132` for `m = 3`.
    pub fn stationarity_defect(&self) -> Result<f64> {
        self.require_m3()?;
        Ok(dot(&C2, &self.probs))
    }

    fn require_m3(&self) -> Result<()> {
        if self.m != 3 {
            return Err(Error::WrongLength { expected: 3, actual: self.m });
        }
        Ok(())
    }
}

fn dot(a: &[f64; 6], p: &[f64]) -> f64 {
    a.iter().zip(p).map(|(w, p)| w * p).sum()
}

/// The four length-3 contrasts plus turning rate and distance to white noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastVector {
    /// Up-down balance `p123 - p321`.
    pub beta: f64,
    /// Persistence `p123 + p321 - 1/3`.
    pub tau: f64,
    /// Rotational asymmetry `p213 + p231 - p132 - p312`.
    pub gamma: f64,
    /// Up-down scaling `p132 + p213 - p231 - p312`.
    pub delta: f64,
    /// Turning rate `2/3 - tau`.
    pub alpha: f64,
    /// `sum (p - 1/6)^2`.
    pub delta2: f64,
}

impl ContrastVector {
    /// `3 tau^2 + 2 beta^2 + gamma^2 + delta^2`.
    pub fn weighted_norm2(&self) -> f64 {
        3.0 * self.tau.powi(2) + 2.0 * self.beta.powi(2) + self.gamma.powi(2) + self.delta.powi(2)
    }
}

/// Contrasts of a length-3 distribution.
pub fn contrast_vector(dist: &PatternDistribution) -> Result<ContrastVector> {
    dist.require_m3()?;
    let p = dist.probs();
    let tau = p[0] + p[5] - 1.0 / 3.0;
    Ok(ContrastVector {
        beta: p[0] - p[5],
        tau,
        gamma: p[2] + p[3] - p[1] - p[4],
        delta: p[1] + p[2] - p[3] - p[4],
        alpha: 2.0 / 3.0 - tau,
        delta2: dist.distance2_to_white_noise(),
    })
}

/// Contrasts as exact ratios of pattern counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactContrasts {
    pub beta: Ratio<i64>,
    pub tau: Ratio<i64>,
    pub gamma: Ratio<i64>,
    pub delta: Ratio<i64>,
    pub alpha: Ratio<i64>,
}

/// Exact contrasts from `m = 3` counts.
pub fn exact_contrasts(counts: &PatternCounts) -> Result<ExactContrasts> {
    if counts.m != 3 {
        return Err(Error::WrongLength { expected: 3, actual: counts.m });
    }
    let n = counts.valid() as i64;
    if n == 0 {
        return Err(Error::AllWindowsTied);
    }
    let c: Vec<i64> = counts.counts.iter().map(|&c| c as i64).collect();
    let r = |num: i64| Ratio::new(num, n);
    let tau = r(c[0] + c[5]) - Ratio::new(1, 3);
    Ok(ExactContrasts {
        beta: r(c[0] - c[5]),
        gamma: r(c[2] + c[3] - c[1] - c[4]),
        delta: r(c[1] + c[2] - c[3] - c[4]),
        alpha: Ratio::new(2, 3) - tau,
        tau,
    })
}

/// The two length-4 contrasts `beta4 = p1234 - p4321` and
/// `tau4 = p1234 + p4321 - 1/12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Length4Contrasts {
    pub beta4: f64,
    pub tau4: f64,
}

pub fn length4_contrasts(dist: &PatternDistribution) -> Result<Length4Contrasts> {
    if dist.m() != 4 {
        return Err(Error::WrongLength { expected: 4, actual: dist.m() });
    }
    let first = dist.prob(0);
    let last = dist.prob(23);
    Ok(Length4Contrasts { beta4: first - last, tau4: first + last - 1.0 / 12.0 })
}

/// Relative frequencies `p_pi(d)` of all patterns in `x`.
pub fn pattern_frequencies(
    x: &TimeSeries,
    w: WindowSpec,
    policy: TiePolicy,
) -> Result<PatternDistribution> {
    PatternDistribution::from_counts(&count_patterns(x, w, policy)?)
}

/// Orthogonal decomposition of `4 |p - q|^2` into contrast components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pythagoras {
    /// `4 |p - q|^2`.
    pub total: f64,
    /// `3 (tau_p - tau_q)^2`.
    pub tau: f64,
    /// `2 (beta_p - beta_q)^2`.
    pub beta: f64,
    /// `(gamma_p - gamma_q)^2`.
    pub gamma: f64,
    /// `(delta_p - delta_q)^2`.
    pub delta: f64,
}

impl Pythagoras {
    pub fn component_sum(&self) -> f64 {
        self.tau + self.beta + self.gamma + self.delta
    }
}

/// Splits the squared distance between two constraint-satisfying length-3
/// distributions into the contributions of the four contrasts.
pub fn pythagoras_check(p: &PatternDistribution, reference: &PatternDistribution) -> Result<Pythagoras> {
    for (name, d) in [("p", p), ("reference", reference)] {
        let defect = d.stationarity_defect()?;
        if defect.abs() > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation(format!(
                "{name}: p213 + p312 - p231 - p132 = {defect:e}"
            )));
        }
    }
    let a = contrast_vector(p)?;
    let b = contrast_vector(reference)?;
    let total = 4.0
        * p.probs()
            .iter()
            .zip(reference.probs())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>();
    Ok(Pythagoras {
        total,
        tau: 3.0 * (a.tau - b.tau).powi(2),
        beta: 2.0 * (a.beta - b.beta).powi(2),
        gamma: (a.gamma - b.gamma).powi(2),
        delta: (a.delta - b.delta).powi(2),
    })
}

/// Shares of the squared distance to white noise carried by each contrast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeContributions {
    pub beta: f64,
    pub tau: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// `(2 beta^2, 3 tau^2, gamma^2, delta^2) / 4 Delta^2`.
///
/// The denominator is taken as the sum of the four components, which equals
/// `4 Delta^2` when the stationarity constraint holds and keeps the shares
/// summing to one for empirical frequencies that miss it by `O(1/T)`.
pub fn relative_contributions(dist: &PatternDistribution) -> Result<RelativeContributions> {
    let c = contrast_vector(dist)?;
    let total = c.weighted_norm2();
    if total <= 1e-24 {
        return Err(Error::DegenerateAtWhiteNoise);
    }
    Ok(RelativeContributions {
        beta: 2.0 * c.beta.powi(2) / total,
        tau: 3.0 * c.tau.powi(2) / total,
        gamma: c.gamma.powi(2) / total,
        delta: c.delta.powi(2) / total,
    })
}

/// Contrasts of one epoch in a sliding analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochContrast {
    /// Epoch number, starting at 0.
    pub epoch: usize,
    /// First sample of the epoch.
    pub start: usize,
    /// `None` when more than half of the windows were tied.
    pub contrasts: Option<ContrastVector>,
    pub valid_windows: u64,
    pub skipped_windows: u64,
    /// Centered moving average of `alpha` over the neighbouring epochs.
    pub smoothed_alpha: Option<f64>,
    /// Moving-average window was cut short by the series boundary.
    pub edge_truncated: bool,
}

/// Parameters of [`sliding_contrast`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlidingSpec {
    pub window: WindowSpec,
    pub epoch_len: usize,
    pub hop: usize,
    pub smoothing_len: usize,
    pub ties: TiePolicy,
}

/// Shortest epoch accepted by [`sliding_contrast`].
pub const MIN_EPOCH_LEN: usize = 200;

/// Per-epoch length-3 contrasts over a series, plus a centered moving average
/// of the turning rate over `smoothing_len` epochs.
pub fn sliding_contrast(x: &TimeSeries, spec: SlidingSpec) -> Result<Vec<EpochContrast>> {
    let w = spec.window;
    if w.m() != 3 {
        return Err(Error::WrongLength { expected: 3, actual: w.m() });
    }
    if spec.epoch_len < MIN_EPOCH_LEN {
        return Err(Error::InvalidParameter(format!(
            "epoch length {} below minimum {MIN_EPOCH_LEN}",
            spec.epoch_len
        )));
    }
    if spec.hop == 0 || spec.smoothing_len == 0 {
        return Err(Error::InvalidParameter("hop and smoothing length must be positive".into()));
    }
    if spec.epoch_len <= w.span() {
        return Err(Error::InvalidParameter(format!(
            "epoch length {} does not exceed window span {}",
            spec.epoch_len,
            w.span()
        )));
    }
    if x.len() < spec.epoch_len {
        return Err(Error::SeriesTooShort { len: x.len(), needed: spec.epoch_len });
    }
    let n_epochs = (x.len() - spec.epoch_len) / spec.hop + 1;

    let mut epochs: Vec<EpochContrast> = (0..n_epochs)
        .into_par_iter()
        .map(|epoch| {
            let start = epoch * spec.hop;
            let seg = x.slice(start, spec.epoch_len);
            let ties = match spec.ties {
                TiePolicy::Jitter { seed } => TiePolicy::Jitter { seed: seed ^ (epoch as u64) },
                TiePolicy::Skip => TiePolicy::Skip,
            };
            let counts = count_patterns(&seg, w, ties).expect("epoch longer than span");
            let valid = counts.valid();
            let contrasts = if counts.skipped * 2 > counts.windows() {
                None
            } else {
                PatternDistribution::from_counts(&counts)
                    .ok()
                    .map(|d| contrast_vector(&d).expect("m = 3"))
            };
            EpochContrast {
                epoch,
                start,
                contrasts,
                valid_windows: valid,
                skipped_windows: counts.skipped,
                smoothed_alpha: None,
                edge_truncated: false,
            }
        })
        .collect();

    let alphas: Vec<Option<f64>> = epochs.iter().map(|e| e.contrasts.map(|c| c.alpha)).collect();
    let before = (spec.smoothing_len - 1) / 2;
    let after = spec.smoothing_len / 2;
    for (i, e) in epochs.iter_mut().enumerate() {
        let lo = i.saturating_sub(before);
        let hi = (i + after).min(n_epochs - 1);
        e.edge_truncated = i < before || i + after > n_epochs - 1;
        let (sum, n) = alphas[lo..=hi]
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), a| (s + a, n + 1));
        e.smoothed_alpha = (n > 0).then(|| sum / n as f64);
    }
    Ok(epochs)
}

/// Length-3 contrasts for each delay `d = 1..=d_max`.
pub fn contrast_vs_delay(
    x: &TimeSeries,
    m: usize,
    d_max: usize,
    ties: TiePolicy,
) -> Result<Vec<(usize, ContrastVector)>> {
    if m != 3 {
        return Err(Error::WrongLength { expected: 3, actual: m });
    }
    if d_max == 0 {
        return Err(Error::ZeroDelay);
    }
    WindowSpec::new(m, d_max)?.window_count(x.len())?;
    (1..=d_max)
        .into_par_iter()
        .map(|d| {
            let dist = pattern_frequencies(x, WindowSpec::new(m, d)?, ties)?;
            Ok((d, contrast_vector(&dist)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const EXAMPLE: [f64; 6] = [1.0, 2.0, 0.0, 1.5, -1.0, 3.0];

    fn example() -> TimeSeries {
        TimeSeries::new(EXAMPLE.to_vec()).unwrap()
    }

    fn w(m: usize, d: usize) -> WindowSpec {
        WindowSpec::new(m, d).unwrap()
    }

    #[test]
    fn frequencies_of_worked_example() {
        let p = pattern_frequencies(&example(), w(3, 1), TiePolicy::Skip).unwrap();
        assert_eq!(p.probs(), &[0.0, 0.0, 0.25, 0.5, 0.25, 0.0]);
        assert_eq!(p.kind(), DistributionKind::Empirical { windows: 4 });
        let p2 = pattern_frequencies(&example(), w(3, 2), TiePolicy::Skip).unwrap();
        assert_eq!(p2.probs(), &[0.0, 0.0, 0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn increasing_series_is_all_123() {
        let x = TimeSeries::new((0..50).map(f64::from).collect()).unwrap();
        for d in 1..=5 {
            let p = pattern_frequencies(&x, w(3, d), TiePolicy::Skip).unwrap();
            assert_eq!(p.prob(0), 1.0);
        }
    }

    #[test]
    fn tied_windows_shrink_denominator() {
        let x = TimeSeries::new(vec![5.0, 5.0, 1.0, 2.0, 3.0]).unwrap();
        let p = pattern_frequencies(&x, w(3, 1), TiePolicy::Skip).unwrap();
        assert_eq!(p.kind(), DistributionKind::Empirical { windows: 2 });
        assert_eq!(p.probs().iter().sum::<f64>(), 1.0);
        let flat = TimeSeries::new(vec![1.0; 5]).unwrap();
        assert_eq!(
            pattern_frequencies(&flat, w(3, 1), TiePolicy::Skip),
            Err(Error::AllWindowsTied)
        );
    }

    #[test]
    fn contrast_examples() {
        let c = contrast_vector(&PatternDistribution::uniform(3)).unwrap();
        assert_abs_diff_eq!(c.beta, 0.0);
        assert_abs_diff_eq!(c.tau, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.alpha, 2.0 / 3.0, epsilon = 1e-15);

        let c = contrast_vector(&PatternDistribution::random_walk3()).unwrap();
        assert_abs_diff_eq!(c.tau, 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!((c.beta, c.gamma, c.delta), (0.0, 0.0, 0.0));

        let p = pattern_frequencies(&example(), w(3, 1), TiePolicy::Skip).unwrap();
        let c = contrast_vector(&p).unwrap();
        assert_abs_diff_eq!(c.beta, 0.0);
        assert_abs_diff_eq!(c.tau, -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.gamma, 0.5);
        assert_abs_diff_eq!(c.delta, -0.5);
        assert_abs_diff_eq!(c.alpha, 1.0, epsilon = 1e-15);

        assert_eq!(
            contrast_vector(&PatternDistribution::uniform(4)),
            Err(Error::WrongLength { expected: 3, actual: 4 })
        );
    }

    #[test]
    fn exact_contrasts_of_example() {
        let counts = count_patterns(&example(), w(3, 1), TiePolicy::Skip).unwrap();
        let c = exact_contrasts(&counts).unwrap();
        assert_eq!(c.beta, Ratio::from_integer(0));
        assert_eq!(c.tau, Ratio::new(-1, 3));
        assert_eq!(c.gamma, Ratio::new(1, 2));
        assert_eq!(c.delta, Ratio::new(-1, 2));
        assert_eq!(c.alpha, Ratio::from_integer(1));
    }

    #[test]
    fn pythagoras_examples() {
        let rw = PatternDistribution::random_walk3();
        let u = PatternDistribution::uniform(3);
        let d = pythagoras_check(&rw, &u).unwrap();
        assert_abs_diff_eq!(d.total, 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.component_sum(), 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rw.distance2_to_white_noise(), 1.0 / 48.0, epsilon = 1e-15);
        let back = pythagoras_check(&u, &rw).unwrap();
        assert_abs_diff_eq!(back.total, d.total, epsilon = 1e-15);
        let same = pythagoras_check(&rw, &rw).unwrap();
        assert_eq!(same.total, 0.0);
        assert_eq!(same.component_sum(), 0.0);
    }

    #[test]
    fn pythagoras_rejects_nonstationary() {
        let bad = PatternDistribution::new(3, vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(
            pythagoras_check(&bad, &PatternDistribution::uniform(3)),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn relative_contribution_examples() {
        let r = relative_contributions(&PatternDistribution::random_walk3()).unwrap();
        assert_abs_diff_eq!(r.tau, 1.0, epsilon = 1e-12);
        assert_eq!((r.beta, r.gamma, r.delta), (0.0, 0.0, 0.0));

        let p = pattern_frequencies(&example(), w(3, 1), TiePolicy::Skip).unwrap();
        let c = contrast_vector(&p).unwrap();
        let r = relative_contributions(&p).unwrap();
        assert_abs_diff_eq!(r.tau, 3.0 * c.tau.powi(2) / (4.0 * c.delta2), epsilon = 1e-12);
        assert_abs_diff_eq!(r.beta + r.tau + r.gamma + r.delta, 1.0, epsilon = 1e-12);

        assert_eq!(
            relative_contributions(&PatternDistribution::uniform(3)),
            Err(Error::DegenerateAtWhiteNoise)
        );
    }

    #[test]
    fn length4_contrasts_of_monotone() {
        let mut probs = vec![0.0; 24];
        probs[0] = 1.0;
        let c = length4_contrasts(&PatternDistribution::new(4, probs).unwrap()).unwrap();
        assert_abs_diff_eq!(c.beta4, 1.0);
        assert_abs_diff_eq!(c.tau4, 11.0 / 12.0);
    }

    #[test]
    fn sliding_hop_equal_to_epoch_is_disjoint_analysis() {
        let x = TimeSeries::new((0..2000).map(|i| ((i * 7919) % 1013) as f64).collect()).unwrap();
        let spec = SlidingSpec {
            window: w(3, 1),
            epoch_len: 500,
            hop: 500,
            smoothing_len: 1,
            ties: TiePolicy::Skip,
        };
        let track = sliding_contrast(&x, spec).unwrap();
        assert_eq!(track.len(), 4);
        for (k, e) in track.iter().enumerate() {
            let seg = x.slice(500 * k, 500);
            let direct = contrast_vector(&pattern_frequencies(&seg, w(3, 1), TiePolicy::Skip).unwrap()).unwrap();
            assert_eq!(e.contrasts, Some(direct));
            assert_eq!(e.smoothed_alpha, Some(direct.alpha));
        }
    }

    #[test]
    fn sliding_smoothing_is_centered_and_truncated() {
        let x = TimeSeries::new((0..1000).map(|i| ((i * 7919) % 1013) as f64).collect()).unwrap();
        let spec = SlidingSpec {
            window: w(3, 1),
            epoch_len: 200,
            hop: 100,
            smoothing_len: 3,
            ties: TiePolicy::Skip,
        };
        let track = sliding_contrast(&x, spec).unwrap();
        assert_eq!(track.len(), 9);
        let a: Vec<f64> = track.iter().map(|e| e.contrasts.unwrap().alpha).collect();
        assert!(track[0].edge_truncated && track[8].edge_truncated && !track[4].edge_truncated);
        assert_abs_diff_eq!(track[0].smoothed_alpha.unwrap(), (a[0] + a[1]) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(track[4].smoothed_alpha.unwrap(), (a[3] + a[4] + a[5]) / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn sliding_flags_mostly_tied_epochs() {
        let mut v: Vec<f64> = (0..400).map(|i| ((i * 37) % 101) as f64 + 0.5 * (i as f64)).collect();
        for x in v.iter_mut().take(400).skip(200) {
            *x = 1.0;
        }
        let x = TimeSeries::new(v).unwrap();
        let spec = SlidingSpec {
            window: w(3, 1),
            epoch_len: 200,
            hop: 200,
            smoothing_len: 3,
            ties: TiePolicy::Skip,
        };
        let track = sliding_contrast(&x, spec).unwrap();
        assert!(track[0].contrasts.is_some());
        assert!(track[1].contrasts.is_none());
        assert_eq!(track[1].smoothed_alpha, track[0].contrasts.map(|c| c.alpha));
    }

    #[test]
    fn sliding_preconditions() {
        let x = TimeSeries::new(vec![0.0; 150]).unwrap();
        let mut spec = SlidingSpec {
            window: w(3, 1),
            epoch_len: 100,
            hop: 1,
            smoothing_len: 1,
            ties: TiePolicy::Skip,
        };
        assert!(matches!(sliding_contrast(&x, spec), Err(Error::InvalidParameter(_))));
        spec.epoch_len = 200;
        assert_eq!(sliding_contrast(&x, spec), Err(Error::SeriesTooShort { len: 150, needed: 200 }));
    }

    #[test]
    fn delay_sweep_alternating_series() {
        // period-2 series: tau(1) takes its minimum -1/3
        let x = TimeSeries::new((0..300).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } + 1e-6 * i as f64).collect())
            .unwrap();
        let table = contrast_vs_delay(&x, 3, 3, TiePolicy::Skip).unwrap();
        assert_eq!(table.len(), 3);
        assert_abs_diff_eq!(table[0].1.tau, -1.0 / 3.0, epsilon = 1e-12);
        assert!(matches!(contrast_vs_delay(&x, 3, 200, TiePolicy::Skip), Err(Error::SeriesTooShort { .. })));
        assert!(matches!(contrast_vs_delay(&x, 4, 2, TiePolicy::Skip), Err(Error::WrongLength { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn stationary3() -> impl Strategy<Value = PatternDistribution> {
            // (p123, p321, p132, p231, p213) free; p312 = p132 + p231 - p213
            prop::array::uniform5(0.0f64..1.0).prop_filter_map("p312 < 0", |[a, b, c, d, e]| {
                let f = c + d - e;
                if f < 0.0 {
                    return None;
                }
                let s = a + b + c + d + e + f;
                if s <= 0.0 {
                    return None;
                }
                let mut probs = vec![a / s, c / s, e / s, d / s, f / s, b / s];
                // absorb rounding into the two symmetric entries
                let fix = (probs[1] + probs[3]) - (probs[2] + probs[4]);
                probs[4] += fix;
                PatternDistribution::new(3, probs).ok()
            })
        }

        proptest! {
            #[test]
            fn frequencies_normalized_and_nearly_stationary(
                v in prop::collection::vec(-100i32..100, 10..300),
                d in 1usize..4,
                seed in any::<u64>(),
            ) {
                let x = TimeSeries::new(v.iter().map(|&i| i as f64).collect()).unwrap();
                let wspec = WindowSpec::new(3, d).unwrap();
                prop_assume!(x.len() > wspec.span());
                for ties in [TiePolicy::Skip, TiePolicy::Jitter { seed }] {
                    let counts = count_patterns(&x, wspec, ties).unwrap();
                    if let Ok(p) = PatternDistribution::from_counts(&counts) {
                        prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                        if counts.skipped == 0 {
                            // maxima and minima alternate within each delay-interleaved subsequence
                            let bound = d as f64 / counts.valid() as f64;
                            prop_assert!(p.stationarity_defect().unwrap().abs() <= bound + 1e-12);
                        }
                    }
                }
            }

            #[test]
            fn identity_holds_for_stationary_pairs(p in stationary3(), q in stationary3()) {
                let d = pythagoras_check(&p, &q).unwrap();
                prop_assert!((d.total - d.component_sum()).abs() < 1e-12);
                let c = contrast_vector(&p).unwrap();
                prop_assert!((4.0 * c.delta2 - c.weighted_norm2()).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&c.beta));
                prop_assert!(c.tau >= -1.0 / 3.0 - 1e-12 && c.tau <= 2.0 / 3.0 + 1e-12);
                prop_assert!(c.alpha >= -1e-12 && c.alpha <= 1.0 + 1e-12);
            }

            #[test]
            fn contrasts_are_linear(p in stationary3(), q in stationary3(), lambda in 0.0f64..1.0) {
                let mix: Vec<f64> = p.probs().iter().zip(q.probs()).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
                let mix = PatternDistribution::new(3, mix).unwrap();
                let (a, b, c) = (contrast_vector(&p).unwrap(), contrast_vector(&q).unwrap(), contrast_vector(&mix).unwrap());
                let lin = |x: f64, y: f64| lambda * x + (1.0 - lambda) * y;
                prop_assert!((c.beta - lin(a.beta, b.beta)).abs() < 1e-12);
                prop_assert!((c.tau - lin(a.tau, b.tau)).abs() < 1e-12);
                prop_assert!((c.gamma - lin(a.gamma, b.gamma)).abs() < 1e-12);
                prop_assert!((c.delta - lin(a.delta, b.delta)).abs() < 1e-12);
            }

            #[test]
            fn reversal_negates_gamma_keeps_tau(p in stationary3()) {
                // time reversal maps pattern pi to reverse(pi)
                let rev: Vec<f64> = (0..6)
                    .map(|i| {
                        let pat = crate::patterns::Pattern::from_index(3, i).unwrap();
                        p.prob(pat.reverse().index())
                    })
                    .collect();
                let r = PatternDistribution::new(3, rev).unwrap();
                let (a, b) = (contrast_vector(&p).unwrap(), contrast_vector(&r).unwrap());
                prop_assert!((a.tau - b.tau).abs() < 1e-12);
                prop_assert!((a.gamma + b.gamma).abs() < 1e-12);
            }
        }
    }
}
