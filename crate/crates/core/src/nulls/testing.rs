use std::fmt;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::quantiles::QuantileSource;
use crate::contrasts::{contrast_vector, length4_contrasts, PatternDistribution};
use crate::entropy::{z_from_counts, MIN_TEST_LEN};
use crate::error::{Error, Result};
use crate::patterns::{count_patterns, TiePolicy, TimeSeries, WindowSpec};

/// Test statistic of a serial-dependence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    /// `Z = T (log m! - H_m)`.
    Entropy { m: usize },
    Beta,
    Tau,
    Gamma,
    Delta,
    Tau4,
    Beta4,
}

impl Statistic {
    /// `T Var` under the i.i.d. null for the normal-approximation tests.
    ///
    /// For `tau4` the value comes from the covariance matrix
    /// `(1/4032) [[199, -17], [-17, 199]]` of `(p1234, p4321)`:
    /// `(2*199 - 2*17) / 4032 = 13/144`.
    pub fn null_variance(&self) -> Option<f64> {
        match self {
            Statistic::Entropy { .. } => None,
            Statistic::Beta => Some(1.0 / 3.0),
            Statistic::Tau => Some(8.0 / 45.0),
            Statistic::Gamma => Some(2.0 / 5.0),
            Statistic::Delta => Some(2.0 / 3.0),
            Statistic::Beta4 => Some((2.0 * 199.0 + 2.0 * 17.0) / 4032.0),
            Statistic::Tau4 => Some((2.0 * 199.0 - 2.0 * 17.0) / 4032.0),
        }
    }

    /// Pattern length the statistic is computed from.
    pub fn pattern_len(&self) -> usize {
        match self {
            Statistic::Entropy { m } => *m,
            Statistic::Beta | Statistic::Tau | Statistic::Gamma | Statistic::Delta => 3,
            Statistic::Tau4 | Statistic::Beta4 => 4,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Entropy { m } => write!(f, "H{m}"),
            Statistic::Beta => write!(f, "beta"),
            Statistic::Tau => write!(f, "tau"),
            Statistic::Gamma => write!(f, "gamma"),
            Statistic::Delta => write!(f, "delta"),
            Statistic::Tau4 => write!(f, "tau4"),
            Statistic::Beta4 => write!(f, "beta4"),
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "beta" => Statistic::Beta,
            "tau" => Statistic::Tau,
            "gamma" => Statistic::Gamma,
            "delta" => Statistic::Delta,
            "tau4" => Statistic::Tau4,
            "beta4" => Statistic::Beta4,
            _ => match s.strip_prefix('H').and_then(|m| m.parse().ok()) {
                Some(m) => Statistic::Entropy { m },
                None => return Err(Error::Parse(format!("unknown statistic {s:?}"))),
            },
        })
    }
}

/// Outcome of a test at a given level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Accepted,
    /// Rejected; statistic significantly above its null value.
    Larger,
    /// Rejected; statistic significantly below its null value.
    Smaller,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accepted => "accepted",
            Decision::Larger => "larger",
            Decision::Smaller => "smaller",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: Statistic,
    pub d: usize,
    /// `Z` for entropy tests, the contrast estimate otherwise.
    pub value: f64,
    pub null_mean: f64,
    /// Standard deviation of the estimate under the null (normal tests only).
    pub null_sd: Option<f64>,
    /// Rejection threshold on `value` (one-sided for entropy, `|value - mean|` otherwise).
    pub critical: f64,
    pub p_value: f64,
    pub level: f64,
    pub decision: Decision,
    /// Where the null distribution came from.
    pub provenance: String,
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level {level} outside (0, 1)")));
    }
    Ok(())
}

/// Permutation-entropy test of the i.i.d. hypothesis: rejects when `Z` is
/// improbably large under the null.
pub fn entropy_test(
    x: &TimeSeries,
    m: usize,
    d: usize,
    level: f64,
    source: &QuantileSource,
    ties: TiePolicy,
) -> Result<TestReport> {
    check_level(level)?;
    if x.len() < MIN_TEST_LEN {
        return Err(Error::SeriesTooShort { len: x.len(), needed: MIN_TEST_LEN });
    }
    let counts = count_patterns(x, WindowSpec::new(m, d)?, ties)?;
    let report = z_from_counts(&counts)?;
    let z = report.z.expect("z from counts");
    let t = report.windows.expect("window count");
    let (p_value, critical, provenance) = source.evaluate(m, t, z, level)?;
    let decision = if p_value < 1.0 - level { Decision::Larger } else { Decision::Accepted };
    Ok(TestReport {
        statistic: Statistic::Entropy { m },
        d,
        value: z,
        null_mean: 0.0,
        null_sd: None,
        critical,
        p_value,
        level,
        decision,
        provenance,
    })
}

/// Two-sided normal test of one pattern contrast against its i.i.d. null
/// (mean 0, variance `Var / N` with `N` counted windows).
pub fn contrast_test(
    x: &TimeSeries,
    statistic: Statistic,
    d: usize,
    level: f64,
    ties: TiePolicy,
) -> Result<TestReport> {
    check_level(level)?;
    let t_var = statistic
        .null_variance()
        .ok_or_else(|| Error::InvalidParameter("entropy statistics use entropy_test".into()))?;
    if x.len() < MIN_TEST_LEN {
        return Err(Error::SeriesTooShort { len: x.len(), needed: MIN_TEST_LEN });
    }
    let counts = count_patterns(x, WindowSpec::new(statistic.pattern_len(), d)?, ties)?;
    let dist = PatternDistribution::from_counts(&counts)?;
    let value = match statistic {
        Statistic::Tau4 | Statistic::Beta4 => {
            let c = length4_contrasts(&dist)?;
            if statistic == Statistic::Tau4 { c.tau4 } else { c.beta4 }
        }
        _ => {
            let c = contrast_vector(&dist)?;
            match statistic {
                Statistic::Beta => c.beta,
                Statistic::Tau => c.tau,
                Statistic::Gamma => c.gamma,
                _ => c.delta,
            }
        }
    };
    let sd = (t_var / counts.valid() as f64).sqrt();
    let normal = Normal::standard();
    let p_value = (2.0 * normal.sf(value.abs() / sd)).min(1.0);
    let critical = normal.inverse_cdf(1.0 - (1.0 - level) / 2.0) * sd;
    let decision = if p_value >= 1.0 - level {
        Decision::Accepted
    } else if value > 0.0 {
        Decision::Larger
    } else {
        Decision::Smaller
    };
    Ok(TestReport {
        statistic,
        d,
        value,
        null_mean: 0.0,
        null_sd: Some(sd),
        critical,
        p_value,
        level,
        decision,
        provenance: "normal approximation".into(),
    })
}

/// Percentages of the trichotomy for one statistic over all segments and delays.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchCell {
    pub statistic: Statistic,
    pub tests: usize,
    /// Segment/delay combinations too short to test.
    pub missing: usize,
    pub accepted_pct: f64,
    pub larger_pct: f64,
    pub smaller_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub level: f64,
    pub cells: Vec<BatchCell>,
    /// Individual tests as `(segment, report)`.
    pub reports: Vec<(usize, TestReport)>,
}

/// Statistics run for the given pattern lengths: entropy for every `m`,
/// the four length-3 contrasts when 3 is listed, `tau4`/`beta4` when 4 is.
fn statistics_for(m_list: &[usize]) -> Vec<Statistic> {
    let mut out: Vec<Statistic> = m_list.iter().map(|&m| Statistic::Entropy { m }).collect();
    if m_list.contains(&3) {
        out.extend([Statistic::Tau, Statistic::Beta, Statistic::Gamma, Statistic::Delta]);
    }
    if m_list.contains(&4) {
        out.extend([Statistic::Tau4, Statistic::Beta4]);
    }
    out
}

/// Runs every statistic at every delay `1..=d_max` on every segment and
/// aggregates accepted/larger/smaller percentages per statistic. Entropy
/// tests use [`QuantileSource::default_for`].
pub fn batch_test(segments: &[TimeSeries], m_list: &[usize], d_max: usize, level: f64) -> Result<BatchReport> {
    batch_test_with(segments, m_list, d_max, level, QuantileSource::default_for)
}

/// As [`batch_test`] with a caller-chosen quantile source per pattern length.
pub fn batch_test_with<F>(
    segments: &[TimeSeries],
    m_list: &[usize],
    d_max: usize,
    level: f64,
    source_for: F,
) -> Result<BatchReport>
where
    F: Fn(usize) -> Option<QuantileSource>,
{
    check_level(level)?;
    if d_max == 0 {
        return Err(Error::ZeroDelay);
    }
    let stats = statistics_for(m_list);
    let mut sources = std::collections::HashMap::new();
    for s in &stats {
        if let Statistic::Entropy { m } = s {
            let src = source_for(*m)
                .ok_or_else(|| Error::InvalidParameter(format!("no quantile source for m = {m}")))?;
            sources.insert(*m, src);
        }
    }
    let mut jobs: Vec<(usize, usize, Statistic)> = Vec::new();
    for seg in 0..segments.len() {
        for d in 1..=d_max {
            jobs.extend(stats.iter().map(|&s| (seg, d, s)));
        }
    }

    let results: Vec<(usize, Statistic, Option<TestReport>)> = jobs
        .par_iter()
        .map(|&(seg, d, stat)| {
            let x = &segments[seg];
            let r = match stat {
                Statistic::Entropy { m } => {
                    entropy_test(x, m, d, level, &sources[&m], TiePolicy::Skip)
                }
                _ => contrast_test(x, stat, d, level, TiePolicy::Skip),
            };
            (seg, stat, r.ok())
        })
        .collect();

    let cells = stats
        .iter()
        .map(|&stat| {
            let (mut acc, mut larger, mut smaller, mut missing) = (0usize, 0usize, 0usize, 0usize);
            for (_, s, r) in &results {
                if *s != stat {
                    continue;
                }
                match r.as_ref().map(|r| r.decision) {
                    Some(Decision::Accepted) => acc += 1,
                    Some(Decision::Larger) => larger += 1,
                    Some(Decision::Smaller) => smaller += 1,
                    None => missing += 1,
                }
            }
            let tests = acc + larger + smaller;
            let pct = |k: usize| if tests == 0 { f64::NAN } else { 100.0 * k as f64 / tests as f64 };
            BatchCell {
                statistic: stat,
                tests,
                missing,
                accepted_pct: pct(acc),
                larger_pct: pct(larger),
                smaller_pct: pct(smaller),
            }
        })
        .collect();

    let reports = results.into_iter().filter_map(|(seg, _, r)| r.map(|r| (seg, r))).collect();
    Ok(BatchReport { level, cells, reports })
}
