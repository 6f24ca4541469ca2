//! Recomputes reference tables and compares them cell by cell.

use std::f64::consts::PI;

use ordpat::contrasts::pattern_frequencies;
use ordpat::entropy::{permutation_entropy, shannon};
use ordpat::nulls::{simulate_quantiles, DEFAULT_LEVELS, MIN_REPLICATES};
use ordpat::processes::{
    ar1_contrasts, coin_tossing_measure, coin_tossing_measure_delayed, generate, Noise, ProcessKind, ProcessSpec,
};
use ordpat::sim::{fill_gaussian_walk, replicate_rng};
use ordpat::{Error, Pattern, PatternDistribution, Result, TiePolicy, TimeSeries, WindowSpec};

use crate::table::{Cell, Table};
use crate::ReproduceTable;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub table: &'static str,
    pub cell: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Row {
    fn new(table: &'static str, cell: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            table,
            cell: cell.into(),
            computed,
            reference,
            tolerance,
            pass: (computed - reference).abs() <= tolerance,
        }
    }
}

pub fn to_table(rows: &[Row]) -> Table {
    let mut t = Table::new(vec!["table", "cell", "computed", "reference", "tolerance", "status"]);
    for r in rows {
        t.push(vec![
            r.table.into(),
            r.cell.clone().into(),
            r.computed.into(),
            r.reference.into(),
            r.tolerance.into(),
            Cell::from(if r.pass { "PASS" } else { "FAIL" }),
        ]);
    }
    t
}

pub fn run(table: ReproduceTable, seed: u64, reps: usize) -> Result<Vec<Row>> {
    match table {
        ReproduceTable::Arpat => arpat(seed),
        ReproduceTable::Tailq => tailq(seed, reps),
        ReproduceTable::Tabi => tabi(seed, reps),
        ReproduceTable::Brown3 => brown3(seed),
        ReproduceTable::Coin => coin(),
    }
}

const PATTERNS3: [&str; 6] = ["123", "132", "213", "231", "312", "321"];

fn arpat(seed: u64) -> Result<Vec<Row>> {
    let sixth = 1.0 / 6.0;
    let reference = [
        (Noise::Normal, [0.0, 0.086, 0.0, 0.0]),
        (Noise::Uniform, [0.0, 0.083, 0.042, 0.0]),
        (Noise::Bernoulli, [0.0, sixth, sixth, 0.0]),
        (Noise::Triangular, [-0.074, 0.088, 0.026, 0.048]),
        (Noise::Exponential, [0.161, 0.107, 0.002, -0.095]),
    ];
    let mut rows = Vec::new();
    for (k, (noise, cells)) in reference.into_iter().enumerate() {
        let c = ar1_contrasts(noise, 1_000_000, seed.wrapping_add(k as u64))?;
        for (name, (got, want)) in ["beta", "tau", "gamma", "delta"].iter().zip([c.beta, c.tau, c.gamma, c.delta].into_iter().zip(cells)) {
            rows.push(Row::new("arpat", format!("{noise}/{name}"), got, want, 0.005));
        }
    }
    Ok(rows)
}

fn tailq(seed: u64, reps: usize) -> Result<Vec<Row>> {
    let cases = [(3usize, [4.47, 6.82, 10.37], [0.1, 0.2, 0.5]), (4, [17.39, 21.75, 27.69], [0.2, 0.3, 0.6])];
    let mut rows = Vec::new();
    for (m, reference, tol) in cases {
        let table = simulate_quantiles(m, 400, reps, seed.wrapping_add(m as u64), &DEFAULT_LEVELS)?;
        for (&(level, z), (want, t)) in table.entries().iter().zip(reference.into_iter().zip(tol)) {
            rows.push(Row::new("tailq", format!("m={m}/T=400/{level}"), z, want, t));
        }
    }
    Ok(rows)
}

/// Orthant probability of three standard normals with the given correlations.
fn orthant3(r12: f64, r13: f64, r23: f64) -> f64 {
    0.125 + (r12.asin() + r13.asin() + r23.asin()) / (4.0 * PI)
}

/// Exact length-4 pattern law of a Gaussian random walk.
fn brownian_p4() -> Vec<f64> {
    Pattern::all(4)
        .map(|p| {
            let mut pos = [0usize; 4];
            for (i, &rank) in p.ranks().iter().enumerate() {
                pos[rank as usize - 1] = i;
            }
            // the pattern holds when the increments between consecutive
            // ranks are positive; each is a signed sum of unit steps
            let forms: Vec<[f64; 3]> = (0..3)
                .map(|k| {
                    let (a, b) = (pos[k], pos[k + 1]);
                    let s = if b > a { 1.0 } else { -1.0 };
                    let (lo, hi) = (a.min(b), a.max(b));
                    std::array::from_fn(|j| if j >= lo && j < hi { s } else { 0.0 })
                })
                .collect();
            let dot = |x: &[f64; 3], y: &[f64; 3]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
            let corr = |i: usize, j: usize| {
                dot(&forms[i], &forms[j]) / (dot(&forms[i], &forms[i]) * dot(&forms[j], &forms[j])).sqrt()
            };
            orthant3(corr(0, 1), corr(0, 2), corr(1, 2))
        })
        .collect()
}

fn tabi(seed: u64, reps: usize) -> Result<Vec<Row>> {
    if reps < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_REPLICATES} replicates, got {reps}")));
    }
    let limit = 24f64.ln() - shannon(&brownian_p4());
    let ts = [100usize, 200, 400, 800];
    let reference = [0.320, 0.254, 0.224, 0.209];
    let w = WindowSpec::new(4, 1)?;
    let mut means = Vec::new();
    let mut sds = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        // T counts windows, so each walk has T + 3 points
        let mut buf = vec![0.0; t + 3];
        let mut devs = Vec::with_capacity(reps);
        for r in 0..reps {
            fill_gaussian_walk(&mut replicate_rng(seed.wrapping_add(k as u64), r as u64), &mut buf);
            let x = TimeSeries::new(buf.clone())?;
            devs.push(permutation_entropy(&pattern_frequencies(&x, w, TiePolicy::Skip)?).deviation);
        }
        let n = reps as f64;
        let mean = devs.iter().sum::<f64>() / n;
        let var = devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        means.push(mean);
        sds.push(var.sqrt());
    }
    let mut rows = Vec::new();
    for k in 0..4 {
        rows.push(Row::new("tabi", format!("mean/T={}", ts[k]), means[k], reference[k], 0.005));
    }
    for k in 0..3 {
        let cell = format!("{}/{}", ts[k], ts[k + 1]);
        let bias = (means[k] - limit) / (means[k + 1] - limit);
        rows.push(Row::new("tabi", format!("bias_ratio/{cell}"), bias, 2.0, 0.15));
        rows.push(Row::new("tabi", format!("sd_ratio/{cell}"), sds[k] / sds[k + 1], 2f64.sqrt(), 0.1));
    }
    Ok(rows)
}

fn brown3(seed: u64) -> Result<Vec<Row>> {
    let spec = ProcessSpec::new(ProcessKind::SymmetricRandomWalk, Noise::Normal, seed);
    let x = generate(spec, 1_000_000)?;
    let p = pattern_frequencies(&x, WindowSpec::new(3, 1)?, TiePolicy::Skip)?;
    let exact = PatternDistribution::random_walk3();
    Ok(PATTERNS3
        .iter()
        .enumerate()
        .map(|(i, name)| Row::new("brown3", format!("p{name}"), p.prob(i), exact.prob(i), 0.002))
        .collect())
}

fn coin() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    // dyadic rationals convert to f64 exactly, so tolerance 0 is an exact check
    let law3 = coin_tossing_measure(3)?.to_distribution();
    let exact3 = PatternDistribution::random_walk3();
    for (i, name) in PATTERNS3.iter().enumerate() {
        rows.push(Row::new("coin", format!("P{name}"), law3.prob(i), exact3.prob(i), 0.0));
    }
    let target: Pattern = "1324".parse()?;
    let p1 = coin_tossing_measure(4)?.to_distribution().prob(target.index());
    rows.push(Row::new("coin", "P1324(1)", p1, 1.0 / 32.0, 0.0));
    for (d, want) in [(2usize, 0.0342), (3, 0.0349)] {
        let p = coin_tossing_measure_delayed(4, d)?.to_distribution().prob(target.index());
        rows.push(Row::new("coin", format!("P1324({d})"), p, want, 0.0005));
    }
    Ok(rows)
}
