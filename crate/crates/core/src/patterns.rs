//! Order patterns: encoding, extraction from numeric series, and the
//! reversal/inverse operations.
//!
//! A pattern of length `m` is stored as its rank sequence: position `k`
//! carries the rank of the `k`-th value inside the window, so the window
//! `(1, 2, 0)` shows pattern `231`. Patterns are numbered lexicographically
//! by rank sequence, which gives the canonical order
//! `123, 132, 213, 231, 312, 321` for `m = 3`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Longest pattern accepted by [`WindowSpec`] for extraction from data.
pub const MAX_WINDOW_LEN: usize = 6;

/// Longest pattern the [`Pattern`] type can represent (12! fits in `usize`).
pub const MAX_PATTERN_LEN: usize = 12;

const FACTORIALS: [usize; 13] = [
    1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800, 39916800, 479001600,
];

/// `n!` for `n <= 12`.
pub fn factorial(n: usize) -> usize {
    FACTORIALS[n]
}

/// A permutation of `1..=m` describing the relative order of `m` values.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    ranks: Vec<u8>,
}

impl Pattern {
    /// Builds a pattern from its rank sequence, checking it is a bijection of `1..=m`.
    pub fn new(ranks: Vec<u8>) -> Result<Self> {
        let m = ranks.len();
        if m == 0 || m > MAX_PATTERN_LEN {
            return Err(Error::UnsupportedLength { m, min: 1, max: MAX_PATTERN_LEN });
        }
        let mut seen = [false; MAX_PATTERN_LEN + 1];
        for &r in &ranks {
            let r = r as usize;
            if r == 0 || r > m || seen[r] {
                return Err(Error::InvalidPattern(format!(
                    "{ranks:?} is not a permutation of 1..={m}"
                )));
            }
            seen[r] = true;
        }
        Ok(Self { ranks })
    }

    /// The increasing pattern `12...m`.
    pub fn identity(m: usize) -> Result<Self> {
        Self::new((1..=m as u8).collect())
    }

    /// Pattern shown by a window of distinct values: `π_k = #{j : x_j <= x_k}`.
    pub fn from_window(values: &[f64]) -> Result<Self> {
        let m = values.len();
        if m == 0 || m > MAX_PATTERN_LEN {
            return Err(Error::UnsupportedLength { m, min: 1, max: MAX_PATTERN_LEN });
        }
        if let Some((first, second)) = find_tie(values) {
            return Err(Error::Tie { first, second });
        }
        let ranks = values
            .iter()
            .map(|&v| values.iter().filter(|&&w| w <= v).count() as u8)
            .collect();
        Ok(Self { ranks })
    }

    /// Decodes a lexicographic index in `0..m!`.
    pub fn from_index(m: usize, index: usize) -> Result<Self> {
        if m == 0 || m > MAX_PATTERN_LEN {
            return Err(Error::UnsupportedLength { m, min: 1, max: MAX_PATTERN_LEN });
        }
        if index >= factorial(m) {
            return Err(Error::InvalidPattern(format!("index {index} out of range for m={m}")));
        }
        let mut unused: Vec<u8> = (1..=m as u8).collect();
        let mut rest = index;
        let mut ranks = Vec::with_capacity(m);
        for k in 0..m {
            let f = factorial(m - 1 - k);
            let digit = rest / f;
            rest %= f;
            ranks.push(unused.remove(digit));
        }
        Ok(Self { ranks })
    }

    /// Lexicographic index of the rank sequence (Lehmer code).
    pub fn index(&self) -> usize {
        lehmer_index(&self.ranks)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn ranks(&self) -> &[u8] {
        &self.ranks
    }

    /// Time reversal: the rank sequence read backwards.
    pub fn reverse(&self) -> Self {
        let mut ranks = self.ranks.clone();
        ranks.reverse();
        Self { ranks }
    }

    /// Functional inverse of the permutation (the "positions of ranks" notation).
    pub fn inverse(&self) -> Self {
        let mut ranks = vec![0u8; self.ranks.len()];
        for (pos, &r) in self.ranks.iter().enumerate() {
            ranks[r as usize - 1] = (pos + 1) as u8;
        }
        Self { ranks }
    }

    /// Pattern shown by the entries at the given positions (0-based, strictly increasing).
    pub fn subpattern(&self, positions: &[usize]) -> Self {
        let picked: Vec<u8> = positions.iter().map(|&p| self.ranks[p]).collect();
        Self { ranks: relative_ranks(&picked) }
    }

    /// All patterns of length `m` in lexicographic order.
    pub fn all(m: usize) -> impl Iterator<Item = Pattern> {
        (0..factorial(m)).map(move |i| Pattern::from_index(m, i).expect("index in range"))
    }
}

/// Ranks of distinct integers, relabelled to `1..=k`.
pub(crate) fn relative_ranks(values: &[u8]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| values.iter().filter(|&&w| w <= v).count() as u8)
        .collect()
}

pub(crate) fn lehmer_index(ranks: &[u8]) -> usize {
    let m = ranks.len();
    let mut index = 0;
    for k in 0..m {
        let smaller_after = ranks[k + 1..].iter().filter(|&&r| r < ranks[k]).count();
        index += smaller_after * factorial(m - 1 - k);
    }
    index
}

fn find_tie(values: &[f64]) -> Option<(usize, usize)> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] == values[j] {
                return Some((i, j));
            }
        }
    }
    None
}

/// Lexicographic pattern index of a window without allocating; `None` on ties.
#[inline]
pub fn window_index(values: &[f64]) -> Option<usize> {
    let m = values.len();
    let mut index = 0;
    for k in 0..m {
        let v = values[k];
        let mut smaller_after = 0;
        for &w in &values[k + 1..] {
            if w < v {
                smaller_after += 1;
            } else if w == v {
                return None;
            }
        }
        index += smaller_after * FACTORIALS[m - 1 - k];
    }
    Some(index)
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ranks.len() <= 9 {
            for r in &self.ranks {
                write!(f, "{r}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.ranks.iter().map(|r| r.to_string()).collect();
            write!(f, "{}", parts.join("-"))
        }
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({self})")
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// Parses `"231"` or, for long patterns, `"10-1-2-..."`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let ranks: Option<Vec<u8>> = if s.contains('-') {
            s.split('-').map(|t| t.trim().parse::<u8>().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as u8)).collect()
        };
        let ranks = ranks.ok_or_else(|| Error::Parse(format!("not a pattern: {s:?}")))?;
        Pattern::new(ranks)
    }
}

/// A validated numeric series: every value finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((position, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { position, value });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous sub-series `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> TimeSeries {
        TimeSeries { values: self.values[start..start + len].to_vec() }
    }

    /// The series read backwards in time.
    pub fn reversed(&self) -> TimeSeries {
        let mut values = self.values.clone();
        values.reverse();
        TimeSeries { values }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        TimeSeries::new(values)
    }
}

/// Pattern length `m` and delay `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowSpec {
    m: usize,
    d: usize,
}

impl WindowSpec {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        if !(2..=MAX_WINDOW_LEN).contains(&m) {
            return Err(Error::UnsupportedLength { m, min: 2, max: MAX_WINDOW_LEN });
        }
        if d == 0 {
            return Err(Error::ZeroDelay);
        }
        Ok(Self { m, d })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Distance between the first and last sample of a window, `(m-1)d`.
    pub fn span(&self) -> usize {
        (self.m - 1) * self.d
    }

    /// Number of windows in a series of length `len`; errors if there are none.
    pub fn window_count(&self, len: usize) -> Result<usize> {
        if len <= self.span() {
            return Err(Error::SeriesTooShort { len, needed: self.span() + 1 });
        }
        Ok(len - self.span())
    }
}

/// What to do with windows that contain equal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Drop tied windows and shrink the denominator accordingly.
    #[default]
    Skip,
    /// Break ties by adding uniform noise of magnitude `1e-9 * (max - min)`.
    Jitter { seed: u64 },
}

const JITTER_SCALE: f64 = 1e-9;

/// Applies the tie policy to a whole series. `Skip` borrows, `Jitter` copies.
pub(crate) fn prepare_values<'a>(
    values: &'a [f64],
    policy: TiePolicy,
) -> std::borrow::Cow<'a, [f64]> {
    match policy {
        TiePolicy::Skip => std::borrow::Cow::Borrowed(values),
        TiePolicy::Jitter { seed } => std::borrow::Cow::Owned(jitter(values, seed)),
    }
}

fn jitter(values: &[f64], seed: u64) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    // a constant series has no scale; fall back to an absolute magnitude
    let magnitude = if range > 0.0 { JITTER_SCALE * range } else { JITTER_SCALE };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values
        .iter()
        .map(|&v| v + magnitude * rng.random_range(-1.0..1.0))
        .collect()
}

/// One window of [`extract_patterns`]: its 0-based start and the pattern,
/// or `None` when the window was skipped because of ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPattern {
    pub start: usize,
    pub pattern: Option<Pattern>,
}

/// Pattern shown by each window `(x_t, x_{t+d}, ..., x_{t+(m-1)d})`.
pub fn extract_patterns(
    x: &TimeSeries,
    w: WindowSpec,
    policy: TiePolicy,
) -> Result<Vec<WindowPattern>> {
    let n = w.window_count(x.len())?;
    let values = prepare_values(x.values(), policy);
    let mut buf = [0.0f64; MAX_WINDOW_LEN];
    Ok((0..n)
        .map(|start| {
            for k in 0..w.m {
                buf[k] = values[start + k * w.d];
            }
            let pattern = window_index(&buf[..w.m])
                .map(|i| Pattern::from_index(w.m, i).expect("index in range"));
            WindowPattern { start, pattern }
        })
        .collect())
}

/// Absolute pattern counts of a series, indexed lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCounts {
    pub m: usize,
    pub d: usize,
    pub counts: Vec<u64>,
    pub skipped: u64,
    pub series_len: usize,
}

impl PatternCounts {
    /// Windows that entered the counts.
    pub fn valid(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// All windows, including skipped ones.
    pub fn windows(&self) -> u64 {
        self.valid() + self.skipped
    }
}

/// Counts patterns over all windows of `values` with the skip rule for ties.
pub(crate) fn count_raw(values: &[f64], m: usize, d: usize) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; factorial(m)];
    let mut skipped = 0;
    let span = (m - 1) * d;
    if values.len() <= span {
        return (counts, 0);
    }
    let mut buf = [0.0f64; MAX_WINDOW_LEN];
    for start in 0..values.len() - span {
        for k in 0..m {
            buf[k] = values[start + k * d];
        }
        match window_index(&buf[..m]) {
            Some(i) => counts[i] += 1,
            None => skipped += 1,
        }
    }
    (counts, skipped)
}

/// Counts the patterns of every window of `x`.
pub fn count_patterns(x: &TimeSeries, w: WindowSpec, policy: TiePolicy) -> Result<PatternCounts> {
    w.window_count(x.len())?;
    let values = prepare_values(x.values(), policy);
    let (counts, skipped) = count_raw(&values, w.m, w.d);
    Ok(PatternCounts { m: w.m, d: w.d, counts, skipped, series_len: x.len() })
}
