//! Process generators and the coin-tossing random order.
//!
//! The coin-tossing order inserts objects `1, 2, 3, ...` one at a time. Object
//! `j` is compared with `j-1, j-2, ..., 1` in that order; a fair coin decides
//! a comparison only when transitivity has not already fixed it. Coins are
//! read in the order `c21, c32, c31, c43, c42, c41, ...`, skipping the ones
//! that are not needed. A coin value of 0 means `X_i < X_j`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::contrasts::{contrast_vector, ContrastVector, PatternDistribution};
use crate::entropy::shannon;
use crate::error::{Error, Result};
use crate::orders::PatternMeasure;
use crate::patterns::{count_patterns, factorial, lehmer_index, Pattern, TiePolicy, TimeSeries, WindowSpec};
use crate::sim::replicate_rng;

/// Largest number of objects enumerated exactly.
pub const MAX_EXACT_OBJECTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessKind {
    WhiteNoise,
    /// `X_0 = 0`, `X_k = X_{k-1} + e_k`; the series is `X_1..X_T`.
    SymmetricRandomWalk,
    /// `exp(X_k / 100)` of the random walk (scaled to stay finite).
    GeometricBm,
    /// `X_k = phi X_{k-1} + e_k`, started after a burn-in.
    Ar1 { phi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Noise {
    Normal,
    Uniform,
    /// `+1` or `-1` with probability 1/2.
    Bernoulli,
    /// Minimum of two independent uniforms.
    Triangular,
    /// `1 + log u` with `u` uniform.
    Exponential,
}

impl Noise {
    pub const ALL: [Noise; 5] = [Noise::Normal, Noise::Uniform, Noise::Bernoulli, Noise::Triangular, Noise::Exponential];

    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Noise::Normal => StandardNormal.sample(rng),
            Noise::Uniform => rng.random(),
            Noise::Bernoulli => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Noise::Triangular => rng.random::<f64>().min(rng.random()),
            // random() is in [0, 1); 1 - u is in (0, 1]
            Noise::Exponential => 1.0 + (1.0 - rng.random::<f64>()).ln(),
        }
    }
}

impl std::str::FromStr for Noise {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "normal" => Noise::Normal,
            "uniform" => Noise::Uniform,
            "bernoulli" => Noise::Bernoulli,
            "triangular" => Noise::Triangular,
            "exponential" => Noise::Exponential,
            _ => return Err(Error::Parse(format!("unknown noise {s:?}"))),
        })
    }
}

impl std::fmt::Display for Noise {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Noise::Normal => "normal",
            Noise::Uniform => "uniform",
            Noise::Bernoulli => "bernoulli",
            Noise::Triangular => "triangular",
            Noise::Exponential => "exponential",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub noise: Noise,
    pub seed: u64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, noise: Noise, seed: u64) -> Self {
        Self { kind, noise, seed }
    }
}

/// AR coefficient used for the AR(1) contrast table.
pub const AR1_PHI: f64 = 0.5;

fn ar1_burn_in(phi: f64) -> usize {
    if phi == 0.0 {
        0
    } else {
        // phi^burn < 1e-20
        ((-46.0 / phi.abs().ln()).ceil() as usize).clamp(1, 100_000)
    }
}

/// Simulates `t` values of the process; deterministic in `spec.seed`.
pub fn generate(spec: ProcessSpec, t: usize) -> Result<TimeSeries> {
    if t == 0 {
        return Err(Error::InvalidParameter("series length must be at least 1".into()));
    }
    let mut rng = replicate_rng(spec.seed, 0);
    let noise = spec.noise;
    let values = match spec.kind {
        ProcessKind::WhiteNoise => (0..t).map(|_| noise.sample(&mut rng)).collect(),
        ProcessKind::SymmetricRandomWalk | ProcessKind::GeometricBm => {
            let mut level = 0.0;
            let walk = (0..t).map(|_| {
                level += noise.sample(&mut rng);
                level
            });
            if spec.kind == ProcessKind::GeometricBm {
                walk.map(|x| (x / 100.0).exp()).collect()
            } else {
                walk.collect()
            }
        }
        ProcessKind::Ar1 { phi } => {
            if !(phi.is_finite() && phi.abs() < 1.0) {
                return Err(Error::InvalidParameter(format!("AR coefficient {phi} must satisfy |phi| < 1")));
            }
            let mut x = 0.0;
            for _ in 0..ar1_burn_in(phi) {
                x = phi * x + noise.sample(&mut rng);
            }
            (0..t)
                .map(|_| {
                    x = phi * x + noise.sample(&mut rng);
                    x
                })
                .collect()
        }
    };
    TimeSeries::new(values)
}

/// Length-3 contrasts (`d = 1`) of a simulated AR(1) series with `phi = 1/2`.
pub fn ar1_contrasts(noise: Noise, t: usize, seed: u64) -> Result<ContrastVector> {
    let x = generate(ProcessSpec::new(ProcessKind::Ar1 { phi: AR1_PHI }, noise, seed), t)?;
    let counts = count_patterns(&x, WindowSpec::new(3, 1)?, TiePolicy::Skip)?;
    contrast_vector(&PatternDistribution::from_counts(&counts)?)
}

/// Supplier of fair coins: 0 means the earlier object is smaller.
pub trait CoinSource {
    fn toss(&mut self) -> u8;
}

/// Coins drawn bit by bit from a random generator.
#[derive(Debug, Clone)]
pub struct RandomCoins<R> {
    rng: R,
    bits: u64,
    left: u32,
}

impl<R: RngCore> RandomCoins<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, bits: 0, left: 0 }
    }
}

impl<R: RngCore> CoinSource for RandomCoins<R> {
    fn toss(&mut self) -> u8 {
        if self.left == 0 {
            self.bits = self.rng.next_u64();
            self.left = 64;
        }
        let c = (self.bits & 1) as u8;
        self.bits >>= 1;
        self.left -= 1;
        c
    }
}

/// A fixed coin sequence; panics when exhausted.
#[derive(Debug, Clone)]
pub struct CoinSequence {
    coins: Vec<u8>,
    next: usize,
}

impl CoinSequence {
    pub fn new(coins: Vec<u8>) -> Self {
        Self { coins, next: 0 }
    }

    pub fn used(&self) -> usize {
        self.next
    }
}

impl CoinSource for CoinSequence {
    fn toss(&mut self) -> u8 {
        let c = self.coins[self.next];
        self.next += 1;
        c
    }
}

/// First `n` objects of a coin-tossing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderPrefix {
    pub n: usize,
    /// `order[i]` is the rank (1-based) of object `i + 1` among the `n` objects.
    pub order: Vec<u32>,
    pub coins_consumed: u64,
}

impl OrderPrefix {
    /// Ranks as a numeric series, ready for pattern counting.
    pub fn to_series(&self) -> TimeSeries {
        TimeSeries::new(self.order.iter().map(|&r| r as f64).collect()).expect("ranks are finite")
    }

    /// Pattern of the first `min(n, 12)` objects.
    pub fn pattern(&self) -> Pattern {
        let k = self.n.min(crate::patterns::MAX_PATTERN_LEN);
        let head: Vec<u8> = self.order[..k].iter().map(|&r| r as u8).collect();
        let mut sorted = head.clone();
        sorted.sort_unstable();
        let ranks = head.iter().map(|r| sorted.binary_search(r).unwrap() as u8 + 1).collect();
        Pattern::new(ranks).expect("relative ranks form a permutation")
    }
}

const NIL: u32 = u32::MAX;

/// Implicit treap over the sorted sequence of objects. Each node stores its
/// subtree size and the largest object id in its subtree, which is exactly
/// what the insertion rule needs: among the objects whose relation to the new
/// one is still open (a contiguous block of the sorted order) the next one
/// compared is the one with the largest index.
struct SortedObjects {
    left: Vec<u32>,
    right: Vec<u32>,
    prio: Vec<u64>,
    size: Vec<u32>,
    max_id: Vec<u32>,
    root: u32,
}

fn priority(id: u32) -> u64 {
    // splitmix64 finalizer; keeps the shape independent of the coins
    let mut z = (id as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SortedObjects {
    fn with_capacity(n: usize) -> Self {
        Self {
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            prio: Vec::with_capacity(n),
            size: Vec::with_capacity(n),
            max_id: Vec::with_capacity(n),
            root: NIL,
        }
    }

    fn sz(&self, t: u32) -> u32 {
        if t == NIL { 0 } else { self.size[t as usize] }
    }

    fn mx(&self, t: u32) -> u32 {
        if t == NIL { 0 } else { self.max_id[t as usize] }
    }

    fn update(&mut self, t: u32) {
        let (l, r) = (self.left[t as usize], self.right[t as usize]);
        self.size[t as usize] = 1 + self.sz(l) + self.sz(r);
        self.max_id[t as usize] = t.max(self.mx(l)).max(self.mx(r));
    }

    /// Splits into the first `k` elements and the rest.
    fn split(&mut self, t: u32, k: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let ls = self.sz(self.left[t as usize]);
        if k <= ls {
            let (a, b) = self.split(self.left[t as usize], k);
            self.left[t as usize] = b;
            self.update(t);
            (a, t)
        } else {
            let (a, b) = self.split(self.right[t as usize], k - ls - 1);
            self.right[t as usize] = a;
            self.update(t);
            (t, b)
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.prio[a as usize] > self.prio[b as usize] {
            let r = self.merge(self.right[a as usize], b);
            self.right[a as usize] = r;
            self.update(a);
            a
        } else {
            let l = self.merge(a, self.left[b as usize]);
            self.left[b as usize] = l;
            self.update(b);
            b
        }
    }

    /// Position (within the subtree) of the node holding the subtree maximum id.
    fn position_of_max(&self, mut t: u32) -> u32 {
        let target = self.mx(t);
        let mut offset = 0;
        loop {
            let l = self.left[t as usize];
            if t == target {
                return offset + self.sz(l);
            }
            if self.mx(l) == target {
                t = l;
            } else {
                offset += self.sz(l) + 1;
                t = self.right[t as usize];
            }
        }
    }

    /// Largest id and its position among sorted positions `lo..hi`.
    fn max_in_range(&mut self, lo: u32, hi: u32) -> Option<(u32, u32)> {
        if lo >= hi {
            return None;
        }
        let (a, rest) = self.split(self.root, lo);
        let (b, c) = self.split(rest, hi - lo);
        let found = (self.mx(b), lo + self.position_of_max(b));
        let bc = self.merge(b, c);
        self.root = self.merge(a, bc);
        Some(found)
    }

    fn insert_at(&mut self, pos: u32) {
        let id = self.left.len() as u32;
        self.left.push(NIL);
        self.right.push(NIL);
        self.prio.push(priority(id));
        self.size.push(1);
        self.max_id.push(id);
        let (a, b) = self.split(self.root, pos);
        let an = self.merge(a, id);
        self.root = self.merge(an, b);
    }

    fn ranks(&self) -> Vec<u32> {
        let mut ranks = vec![0u32; self.left.len()];
        let mut stack = Vec::new();
        let mut t = self.root;
        let mut next = 1;
        while t != NIL || !stack.is_empty() {
            while t != NIL {
                stack.push(t);
                t = self.left[t as usize];
            }
            let u = stack.pop().unwrap();
            ranks[u as usize] = next;
            next += 1;
            t = self.right[u as usize];
        }
        ranks
    }
}

/// Builds the first `n` objects of the coin-tossing order from the given coins.
pub fn coin_tossing_prefix_with<C: CoinSource>(n: usize, coins: &mut C) -> Result<OrderPrefix> {
    if n == 0 {
        return Err(Error::InvalidParameter("prefix length must be at least 1".into()));
    }
    if n >= NIL as usize {
        return Err(Error::InvalidParameter(format!("prefix length {n} too large")));
    }
    let mut objects = SortedObjects::with_capacity(n);
    let mut consumed = 0u64;
    objects.insert_at(0);
    for j in 1..n as u32 {
        // new object goes into a gap in lo..=hi of the sorted order
        let (mut lo, mut hi) = (0u32, j);
        while let Some((_, pos)) = objects.max_in_range(lo, hi) {
            consumed += 1;
            if coins.toss() == 0 {
                lo = pos + 1;
            } else {
                hi = pos;
            }
        }
        objects.insert_at(lo);
    }
    Ok(OrderPrefix { n, order: objects.ranks(), coins_consumed: consumed })
}

/// Coin-tossing prefix driven by ChaCha8 seeded with `seed`.
pub fn coin_tossing_prefix(n: usize, seed: u64) -> Result<OrderPrefix> {
    coin_tossing_prefix_with(n, &mut RandomCoins::new(replicate_rng(seed, 0)))
}

/// Number of pairs `i < j` with no `k` strictly between them (in position)
/// whose value lies strictly between `π_i` and `π_j`.
pub fn u_energy(p: &Pattern) -> u32 {
    energy_of(p.ranks())
}

fn energy_of(r: &[u8]) -> u32 {
    let m = r.len();
    let mut u = 0;
    for i in 0..m {
        // nearest values below and above r[i] seen strictly between i and j
        let (mut below, mut above) = (0u8, u8::MAX);
        for &v in &r[i + 1..] {
            if v > below && v < above {
                u += 1;
            }
            if v < r[i] {
                below = below.max(v);
            } else {
                above = above.min(v);
            }
        }
    }
    u
}

/// Exact law of the coin-tossing order on `S_m` as a measure: `p = 2^-u`.
pub fn coin_tossing_measure(m: usize) -> Result<PatternMeasure> {
    coin_tossing_measure_delayed(m, 1)
}

/// Exact law of patterns at delay `d`, summing `2^-u(η)` over all
/// `η ∈ S_{(m-1)d+1}` grouped by the pattern of their stride-`d` subsample.
pub fn coin_tossing_measure_delayed(m: usize, d: usize) -> Result<PatternMeasure> {
    if d == 0 {
        return Err(Error::ZeroDelay);
    }
    if m == 0 {
        return Err(Error::UnsupportedLength { m, min: 1, max: MAX_EXACT_OBJECTS });
    }
    let n = (m - 1) * d + 1;
    if n > MAX_EXACT_OBJECTS {
        return Err(Error::SizeLimit { objects: n, limit: MAX_EXACT_OBJECTS });
    }
    let max_u = (n * (n - 1) / 2) as u32;
    let positions: Vec<usize> = (0..m).map(|k| k * d).collect();
    let mf = factorial(m);
    // numerators over 2^max_u; n! * 2^45 < 2^67 fits in u128
    let chunks = factorial(n).div_ceil(4096);
    let sums = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0u128; mf];
            let end = ((c + 1) * 4096).min(factorial(n));
            for idx in c * 4096..end {
                let eta = Pattern::from_index(n, idx).expect("index in range");
                let sub: Vec<u8> = positions.iter().map(|&p| eta.ranks()[p]).collect();
                let k = lehmer_index(&sub);
                acc[k] += 1u128 << (max_u - energy_of(eta.ranks()));
            }
            acc
        })
        .reduce(
            || vec![0u128; mf],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let den = BigInt::from(1u128 << max_u);
    let probs = sums.into_iter().map(|s| BigRational::new(BigInt::from(s), den.clone())).collect();
    PatternMeasure::new(m, probs)
}

/// How [`coin_tossing_distribution_delayed`] computes probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinMethod {
    Exact,
    /// Pattern frequencies of one prefix of `n` objects.
    MonteCarlo { n: usize, seed: u64 },
}

/// Exact coin-tossing pattern law on `S_m`, `m <= 10`.
pub fn coin_tossing_distribution(m: usize) -> Result<PatternDistribution> {
    Ok(coin_tossing_measure(m)?.to_distribution())
}

/// Coin-tossing pattern law at delay `d`.
pub fn coin_tossing_distribution_delayed(m: usize, d: usize, method: CoinMethod) -> Result<PatternDistribution> {
    match method {
        CoinMethod::Exact => Ok(coin_tossing_measure_delayed(m, d)?.to_distribution()),
        CoinMethod::MonteCarlo { n, seed } => {
            let prefix = coin_tossing_prefix(n, seed)?;
            let counts = count_patterns(&prefix.to_series(), WindowSpec::new(m, d)?, TiePolicy::Skip)?;
            PatternDistribution::from_counts(&counts)
        }
    }
}

/// Both sides of `H(Q) = M_Q(u) log 2` for a distribution on `S_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsCheck {
    /// Shannon entropy in nats.
    pub entropy: f64,
    /// Mean of `u` under the distribution.
    pub mean_energy: f64,
}

impl GibbsCheck {
    /// `M(u) log 2`.
    pub fn energy_nats(&self) -> f64 {
        self.mean_energy * std::f64::consts::LN_2
    }
}

/// Entropy and mean energy of an arbitrary distribution on `S_m`; the entropy
/// never exceeds `M(u) log 2`, with equality only for the coin-tossing law.
pub fn gibbs_bound(q: &PatternDistribution) -> GibbsCheck {
    let m = q.m();
    let mean_energy = q
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| p * u_energy(&Pattern::from_index(m, i).expect("index in range")) as f64)
        .sum();
    GibbsCheck { entropy: shannon(q.probs()), mean_energy }
}

/// Gibbs identity for the coin-tossing law on `S_m`.
pub fn gibbs_check(m: usize) -> Result<GibbsCheck> {
    Ok(gibbs_bound(&coin_tossing_distribution(m)?))
}
