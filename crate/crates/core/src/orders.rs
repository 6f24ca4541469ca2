//! Random orders described by their pattern laws, in exact rational arithmetic.
//!
//! A family `P_2, P_3, ...` of pattern measures defines a random order on the
//! positive integers when it is consistent (the first `m` positions of
//! `P_{m+1}` have law `P_m`). Each measure is also pictured as a step
//! function on `[0, 1]` through interval coding.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::contrasts::PatternDistribution;
use crate::error::{Error, Result};
use crate::patterns::{factorial, lehmer_index, Pattern, MAX_PATTERN_LEN};

/// Longest pattern length reached by [`extend_to`].
pub const MAX_EXTENSION_LEN: usize = 8;

/// First line of the text serialization.
pub const MEASURE_HEADER: &str = "# ordpat-measure v1";

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Results of the verification routines, `None` when not checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MeasureFlags {
    pub consistent_with_parent: Option<bool>,
    pub stationary: Option<bool>,
}

/// Exact probability measure on `S_m`, indexed lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMeasure {
    m: usize,
    probs: Vec<BigRational>,
    pub flags: MeasureFlags,
}

impl PatternMeasure {
    /// Requires `m!` nonnegative entries summing to exactly 1.
    pub fn new(m: usize, probs: Vec<BigRational>) -> Result<Self> {
        if m == 0 || m > MAX_PATTERN_LEN {
            return Err(Error::UnsupportedLength { m, min: 1, max: MAX_PATTERN_LEN });
        }
        if probs.len() != factorial(m) {
            return Err(Error::WrongLength { expected: factorial(m), actual: probs.len() });
        }
        if let Some(i) = probs.iter().position(|p| p.is_negative()) {
            return Err(Error::ConstraintViolation(format!("negative probability at index {i}")));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::ConstraintViolation(format!("probabilities sum to {total}")));
        }
        Ok(Self { m, probs, flags: MeasureFlags::default() })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_PATTERN_LEN {
            return Err(Error::UnsupportedLength { m, min: 1, max: MAX_PATTERN_LEN });
        }
        let n = factorial(m);
        Self::new(m, vec![rat(1, n as i64); n])
    }

    pub fn point_mass(p: &Pattern) -> Self {
        let mut probs = vec![BigRational::zero(); factorial(p.len())];
        probs[p.index()] = BigRational::one();
        Self { m: p.len(), probs, flags: MeasureFlags::default() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, p: &Pattern) -> BigRational {
        self.probs[p.index()].clone()
    }

    /// Floating-point copy for the statistics routines.
    pub fn to_distribution(&self) -> PatternDistribution {
        let probs = self.probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect();
        PatternDistribution::new(self.m, probs).expect("exact measure is normalized")
    }

    /// `m; index:num/den; ...` after a version line; zero entries are omitted.
    pub fn to_text(&self) -> String {
        let mut out = format!("{MEASURE_HEADER}\n{}", self.m);
        for (i, p) in self.probs.iter().enumerate() {
            if !p.is_zero() {
                out.push_str(&format!("; {i}:{}/{}", p.numer(), p.denom()));
            }
        }
        out.push('\n');
        out
    }
}

impl fmt::Display for PatternMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for PatternMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(MEASURE_HEADER) {
            return Err(Error::Parse(format!("measure must start with {MEASURE_HEADER:?}")));
        }
        let body: String = lines.collect::<Vec<_>>().join(" ");
        let mut fields = body.split(';').map(str::trim);
        let m: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Parse("missing pattern length".into()))?;
        if m == 0 || m > MAX_PATTERN_LEN {
            return Err(Error::UnsupportedLength { m, min: 1, max: MAX_PATTERN_LEN });
        }
        let mut probs = vec![BigRational::zero(); factorial(m)];
        let mut seen = vec![false; factorial(m)];
        for field in fields.filter(|f| !f.is_empty()) {
            let bad = || Error::Parse(format!("bad entry {field:?}"));
            let (idx, value) = field.split_once(':').ok_or_else(bad)?;
            let idx: usize = idx.trim().parse().map_err(|_| bad())?;
            if idx >= probs.len() || seen[idx] {
                return Err(bad());
            }
            seen[idx] = true;
            probs[idx] = value.trim().parse::<BigRational>().map_err(|_| bad())?;
        }
        PatternMeasure::new(m, probs)
    }
}

/// Subinterval `[left, left + 1/m!]` of `[0, 1]` coding a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderInterval {
    pub m: usize,
    pub left: BigRational,
}

impl OrderInterval {
    pub fn length(&self) -> BigRational {
        rat(1, factorial(self.m) as i64)
    }

    pub fn right(&self) -> BigRational {
        &self.left + self.length()
    }

    /// Whether `[left, right)` (or `[left, 1]` for the last interval) contains `x`.
    pub fn contains(&self, x: &BigRational) -> bool {
        let right = self.right();
        *x >= self.left && (*x < right || (right.is_one() && x.is_one()))
    }
}

/// `x(π) = Σ_{k=2..m} r_k / k!` with `r_k = #{j < k : π_j > π_k}`.
pub fn interval_of(p: &Pattern) -> OrderInterval {
    let r = p.ranks();
    let m = r.len();
    let mut num: i64 = 0;
    for k in 1..m {
        let rk = r[..k].iter().filter(|&&v| v > r[k]).count() as i64;
        num += rk * (factorial(m) / factorial(k + 1)) as i64;
    }
    OrderInterval { m, left: rat(num, factorial(m) as i64) }
}

/// Interval of the pattern shown by a tie-free window.
pub fn interval_of_window(values: &[f64]) -> Result<OrderInterval> {
    Ok(interval_of(&Pattern::from_window(values)?))
}

/// Pattern of `S_m` whose interval contains `x ∈ [0, 1]`.
pub fn locate(x: &BigRational, m: usize) -> Result<Pattern> {
    if m == 0 || m > MAX_PATTERN_LEN {
        return Err(Error::UnsupportedLength { m, min: 1, max: MAX_PATTERN_LEN });
    }
    if x.is_negative() || *x > BigRational::one() {
        return Err(Error::InvalidParameter(format!("{x} outside [0, 1]")));
    }
    let scaled = (x * BigRational::from_integer(BigInt::from(factorial(m)))).floor();
    let mut n = scaled.to_integer().to_usize().unwrap_or(0).min(factorial(m) - 1);
    // mixed-radix digits: n = r_m + m (r_{m-1} + (m-1)(...))
    let mut r = vec![0usize; m + 1];
    for k in (2..=m).rev() {
        r[k] = n % k;
        n /= k;
    }
    // insert object k so that r_k earlier objects lie above it
    let mut sorted: Vec<usize> = Vec::with_capacity(m);
    for (k, &above) in r.iter().enumerate().skip(1) {
        sorted.insert(k - 1 - above, k);
    }
    let mut ranks = vec![0u8; m];
    for (pos, &obj) in sorted.iter().enumerate() {
        ranks[obj - 1] = pos as u8 + 1;
    }
    Pattern::new(ranks)
}

/// Pattern containing a floating-point location.
pub fn locate_f64(x: f64, m: usize) -> Result<Pattern> {
    let q = BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))?;
    locate(&q, m)
}

/// Step function `F_m = m! P_m(π)` on `I(π)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub m: usize,
    /// Height on the interval of the pattern with the same index.
    pub heights: Vec<BigRational>,
}

impl Histogram {
    /// `(left, right, height)` ordered by position in `[0, 1]`.
    pub fn steps(&self) -> Vec<(BigRational, BigRational, BigRational)> {
        let mut steps: Vec<_> = Pattern::all(self.m)
            .map(|p| {
                let iv = interval_of(&p);
                (iv.left.clone(), iv.right(), self.heights[p.index()].clone())
            })
            .collect();
        steps.sort_by(|a, b| a.0.cmp(&b.0));
        steps
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        Ok(self.heights[locate(x, self.m)?.index()].clone())
    }

    /// `∫_a^b F_m` for `0 <= a <= b <= 1`.
    pub fn integral_between(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let mut total = BigRational::zero();
        for (l, r, h) in self.steps() {
            let lo = if l > *a { l } else { a.clone() };
            let hi = if r < *b { r } else { b.clone() };
            if hi > lo {
                total += (hi - lo) * h;
            }
        }
        total
    }

    pub fn integral(&self) -> BigRational {
        self.integral_between(&BigRational::zero(), &BigRational::one())
    }
}

pub fn histogram(p: &PatternMeasure) -> Histogram {
    let scale = BigRational::from_integer(BigInt::from(factorial(p.m)));
    Histogram { m: p.m, heights: p.probs.iter().map(|x| x * &scale).collect() }
}

/// Law of the pattern shown at the given positions (0-based, strictly increasing).
pub fn restrict(p: &PatternMeasure, positions: &[usize]) -> Result<PatternMeasure> {
    if positions.is_empty() || positions.windows(2).any(|w| w[0] >= w[1]) || positions[positions.len() - 1] >= p.m {
        return Err(Error::InvalidParameter(format!(
            "positions {positions:?} must be strictly increasing within 0..{}",
            p.m
        )));
    }
    let k = positions.len();
    let mut probs = vec![BigRational::zero(); factorial(k)];
    for (i, w) in p.probs.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let pat = Pattern::from_index(p.m, i)?;
        probs[pat.subpattern(positions).index()] += w;
    }
    PatternMeasure::new(k, probs)
}

fn restrict_contiguous(p: &PatternMeasure, start: usize, len: usize) -> PatternMeasure {
    let positions: Vec<usize> = (start..start + len).collect();
    restrict(p, &positions).expect("valid contiguous block")
}

/// Outcome of an exact check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub holds: bool,
    pub max_violation: BigRational,
}

impl CheckReport {
    fn from_max(max_violation: BigRational) -> Self {
        Self { holds: max_violation.is_zero(), max_violation }
    }

    pub fn max_violation_f64(&self) -> f64 {
        self.max_violation.to_f64().unwrap_or(f64::INFINITY)
    }
}

fn max_abs_diff(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(BigRational::zero)
}

/// Whether the first `m` positions of `P_{m+1}` have law `P_m`.
pub fn check_consistency(pm: &PatternMeasure, pm1: &PatternMeasure) -> Result<CheckReport> {
    if pm1.m != pm.m + 1 {
        return Err(Error::WrongLength { expected: pm.m + 1, actual: pm1.m });
    }
    let head = restrict_contiguous(pm1, 0, pm.m);
    Ok(CheckReport::from_max(max_abs_diff(&head.probs, &pm.probs)))
}

/// Whether every contiguous sub-pattern law is the same at all shifts.
pub fn check_stationarity(p: &PatternMeasure) -> CheckReport {
    let mut worst = BigRational::zero();
    for k in 2..p.m {
        let first = restrict_contiguous(p, 0, k);
        for t in 1..=p.m - k {
            let other = restrict_contiguous(p, t, k);
            worst = worst.max(max_abs_diff(&first.probs, &other.probs));
        }
    }
    CheckReport::from_max(worst)
}

/// Lifts a stationary `P_m` to a stationary, consistent `P_{m+1}`:
/// `P(π) = P_m(λ) P_m(η) / P_{m-1}(κ)` with `λ, η, κ` the patterns of
/// `π_1..π_m`, `π_2..π_{m+1}`, `π_2..π_m`, halved when `|π_1 - π_{m+1}| = 1`
/// (that value is shared with `π_{m+1} π_2 ... π_m π_1`).
pub fn markov_extension(p: &PatternMeasure) -> Result<PatternMeasure> {
    let m = p.m;
    if m < 2 {
        return Err(Error::UnsupportedLength { m, min: 2, max: MAX_PATTERN_LEN - 1 });
    }
    if m + 1 > MAX_PATTERN_LEN {
        return Err(Error::UnsupportedLength { m, min: 2, max: MAX_PATTERN_LEN - 1 });
    }
    let stationarity = check_stationarity(p);
    if !stationarity.holds {
        return Err(Error::NonStationaryInput { violation: stationarity.max_violation_f64() });
    }
    let marginal = restrict_contiguous(p, 0, m - 1);
    let half = rat(1, 2);
    let mut probs = Vec::with_capacity(factorial(m + 1));
    for pi in Pattern::all(m + 1) {
        let r = pi.ranks();
        let lambda = lehmer_index(&crate::patterns::relative_ranks(&r[..m]));
        let eta = lehmer_index(&crate::patterns::relative_ranks(&r[1..]));
        let kappa = lehmer_index(&crate::patterns::relative_ranks(&r[1..m]));
        let num = &p.probs[lambda] * &p.probs[eta];
        let den = &marginal.probs[kappa];
        let mut value = if num.is_zero() {
            BigRational::zero()
        } else if den.is_zero() {
            return Err(Error::ZeroDenominator { index: pi.index() });
        } else {
            num / den
        };
        if (r[0] as i32 - r[m] as i32).abs() == 1 {
            value *= &half;
        }
        probs.push(value);
    }
    let mut out = PatternMeasure::new(m + 1, probs)
        .map_err(|e| Error::ExtensionCheckFailed(format!("normalization: {e}")))?;
    let consistency = check_consistency(p, &out)?;
    let stationarity = check_stationarity(&out);
    if !consistency.holds {
        return Err(Error::ExtensionCheckFailed(format!("consistency violated by {}", consistency.max_violation)));
    }
    if !stationarity.holds {
        return Err(Error::ExtensionCheckFailed(format!("stationarity violated by {}", stationarity.max_violation)));
    }
    out.flags = MeasureFlags { consistent_with_parent: Some(true), stationary: Some(true) };
    Ok(out)
}

/// Iterated Markov extension up to pattern length `target <= 8`.
pub fn extend_to(p: &PatternMeasure, target: usize) -> Result<PatternMeasure> {
    if target < p.m || target > MAX_EXTENSION_LEN {
        return Err(Error::InvalidParameter(format!(
            "target length {target} must lie in {}..={MAX_EXTENSION_LEN}",
            p.m
        )));
    }
    let mut cur = p.clone();
    while cur.m < target {
        cur = markov_extension(&cur)?;
    }
    Ok(cur)
}

/// Random stationary measure on `S_3` with full support: a uniform draw from
/// the compositions of `total` into six positive parts, rejected unless
/// `k132 + k231 = k213 + k312`.
pub fn sample_stationary_measure3<R: Rng + ?Sized>(rng: &mut R, total: u32) -> Result<PatternMeasure> {
    if total < 6 {
        return Err(Error::InvalidParameter("total must be at least 6".into()));
    }
    loop {
        // five distinct cut points in 1..total
        let mut cuts: Vec<u32> = Vec::with_capacity(5);
        while cuts.len() < 5 {
            let c = rng.random_range(1..total);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.sort_unstable();
        let mut parts = [0i64; 6];
        let mut prev = 0;
        for (i, &c) in cuts.iter().chain(std::iter::once(&total)).enumerate() {
            parts[i] = (c - prev) as i64;
            prev = c;
        }
        // order 123, 132, 213, 231, 312, 321
        if parts[1] + parts[3] == parts[2] + parts[4] {
            let probs = parts.iter().map(|&k| rat(k, total as i64)).collect();
            return PatternMeasure::new(3, probs);
        }
    }
}
