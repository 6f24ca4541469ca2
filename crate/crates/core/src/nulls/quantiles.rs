use std::fmt;

use rayon::prelude::*;

use crate::entropy::deviation_from_counts;
use crate::error::{Error, Result};
use crate::patterns::count_raw;
use crate::sim::{fill_white_noise, replicate_rng};

/// Levels reported by default.
pub const DEFAULT_LEVELS: [f64; 3] = [0.95, 0.99, 0.999];

/// Smallest replicate count accepted by [`simulate_quantiles`].
pub const MIN_REPLICATES: usize = 10_000;

/// Published critical values of `Z` under the i.i.d. null, `(m, T, [z95, z99, z999])`.
const PUBLISHED: [(usize, usize, [f64; 3]); 7] = [
    (3, 200, [4.49, 6.91, 10.39]),
    (3, 400, [4.47, 6.82, 10.37]),
    (3, 800, [4.46, 6.81, 10.36]),
    (4, 100, [18.40, 22.89, 28.88]),
    (4, 200, [17.64, 22.06, 28.08]),
    (4, 400, [17.39, 21.75, 27.69]),
    (4, 800, [17.29, 21.63, 27.56]),
];

/// Origin of a quantile table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Published reference values.
    Published,
    /// Own simulation.
    Simulated { seed: u64, n_reps: usize },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Published => write!(f, "published"),
            Provenance::Simulated { seed, n_reps } => write!(f, "simulated(seed={seed},reps={n_reps})"),
        }
    }
}

/// Critical values `z` with `P(Z <= z) = level` under the i.i.d. null.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub m: usize,
    /// Sample size as a window count.
    pub t: usize,
    entries: Vec<(f64, f64)>,
    pub provenance: Provenance,
}

impl QuantileTable {
    /// Builds a table from `(level, z)` pairs; levels must lie in (0, 1) and
    /// `z` must increase with the level.
    pub fn new(m: usize, t: usize, mut entries: Vec<(f64, f64)>, provenance: Provenance) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty quantile table".into()));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(level, z) in &entries {
            if !(level > 0.0 && level < 1.0) || !z.is_finite() || z < 0.0 {
                return Err(Error::InvalidParameter(format!("bad quantile entry ({level}, {z})")));
            }
        }
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 || pair[0].1 > pair[1].1 {
                return Err(Error::InvalidParameter(format!(
                    "quantiles not monotone in level: {:?} then {:?}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { m, t, entries, provenance })
    }

    /// `(level, z)` pairs in increasing level.
    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Knots `(z, ln p)` of the tail function, starting at `(0, 0)`.
    fn knots(&self) -> Vec<(f64, f64)> {
        std::iter::once((0.0, 0.0))
            .chain(self.entries.iter().map(|&(level, z)| (z, (1.0 - level).ln())))
            .collect()
    }

    /// Tail probability `P(Z >= z)`, log-linear between tabulated points and
    /// extrapolated with the last segment beyond the largest one.
    pub fn p_value(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 1.0;
        }
        let knots = self.knots();
        let seg = knots
            .windows(2)
            .find(|w| z <= w[1].0)
            .unwrap_or(&knots[knots.len() - 2..]);
        let (z0, l0) = seg[0];
        let (z1, l1) = seg[1];
        let lp = if z1 > z0 { l0 + (l1 - l0) * (z - z0) / (z1 - z0) } else { l1 };
        lp.exp().min(1.0)
    }

    /// Critical value at `level`, the inverse of [`Self::p_value`].
    pub fn critical(&self, level: f64) -> f64 {
        if let Some(&(_, z)) = self.entries.iter().find(|(l, _)| (l - level).abs() < 1e-12) {
            return z;
        }
        let target = (1.0 - level).ln();
        let knots = self.knots();
        let seg = knots
            .windows(2)
            .find(|w| target >= w[1].1)
            .unwrap_or(&knots[knots.len() - 2..]);
        let (z0, l0) = seg[0];
        let (z1, l1) = seg[1];
        if l1 == l0 {
            z1
        } else {
            z0 + (target - l0) * (z1 - z0) / (l1 - l0)
        }
    }

    /// Published row for a tabulated `T`, interpolated linearly in `1/T`
    /// between rows otherwise, and clamped to the first/last row outside the
    /// tabulated range.
    pub fn published_for(m: usize, t: usize) -> Option<QuantileTable> {
        let rows: Vec<&(usize, usize, [f64; 3])> = PUBLISHED.iter().filter(|r| r.0 == m).collect();
        if rows.is_empty() || t == 0 {
            return None;
        }
        let inv = 1.0 / t as f64;
        let z = if t <= rows[0].1 {
            rows[0].2
        } else if t >= rows[rows.len() - 1].1 {
            rows[rows.len() - 1].2
        } else {
            let k = rows.windows(2).position(|w| t >= w[0].1 && t <= w[1].1).unwrap();
            let (a, b) = (rows[k], rows[k + 1]);
            let (ia, ib) = (1.0 / a.1 as f64, 1.0 / b.1 as f64);
            let f = (inv - ia) / (ib - ia);
            std::array::from_fn(|i| a.2[i] + f * (b.2[i] - a.2[i]))
        };
        let entries = DEFAULT_LEVELS.iter().copied().zip(z).collect();
        QuantileTable::new(m, t, entries, Provenance::Published).ok()
    }
}

/// Published row for exactly this `(m, T)`.
pub fn published_table(m: usize, t: usize) -> Option<QuantileTable> {
    PUBLISHED
        .iter()
        .find(|r| r.0 == m && r.1 == t)
        .map(|r| QuantileTable::new(m, t, DEFAULT_LEVELS.iter().copied().zip(r.2).collect(), Provenance::Published).unwrap())
}

/// Empirical tail formula for `m = 3`: `P(Z >= z) = exp(-2z/3)`.
pub fn tail_formula_p(z: f64) -> f64 {
    (-2.0 * z / 3.0).exp().min(1.0)
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
pub fn quantile_of_sorted(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let h = (n - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `Z = T (log m! - H_m)` for `n_reps` white-noise series with `t` windows
/// (length `t + m - 1`), in replicate order. Replicate `i` uses stream `i` of `seed`.
pub fn simulate_null_z(m: usize, t: usize, n_reps: usize, seed: u64) -> Vec<f64> {
    (0..n_reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; t + m - 1],
            |buf, rep| {
                let mut rng = replicate_rng(seed, rep as u64);
                fill_white_noise(&mut rng, buf);
                let (counts, _) = count_raw(buf, m, 1);
                t as f64 * deviation_from_counts(&counts)
            },
        )
        .collect()
}

/// Simulated critical values of `Z` under the i.i.d. null.
pub fn simulate_quantiles(m: usize, t: usize, n_reps: usize, seed: u64, levels: &[f64]) -> Result<QuantileTable> {
    if n_reps < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_REPLICATES} replicates, got {n_reps}"
        )));
    }
    if !(2..=6).contains(&m) || t < m + 1 {
        return Err(Error::InvalidParameter(format!("unsupported (m, T) = ({m}, {t})")));
    }
    let mut z = simulate_null_z(m, t, n_reps, seed);
    z.sort_by(f64::total_cmp);
    let entries = levels.iter().map(|&l| (l, quantile_of_sorted(&z, l))).collect();
    QuantileTable::new(m, t, entries, Provenance::Simulated { seed, n_reps })
}

/// How an entropy test turns `Z` into a p-value.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantileSource {
    /// `exp(-2z/3)`; only for `m = 3`.
    TailFormula,
    /// Published table, interpolated in `1/T`.
    Published,
    /// A table supplied by the caller (simulated or read from the cache).
    Table(QuantileTable),
}

impl QuantileSource {
    /// Tail formula for `m = 3`, published table for `m = 4`.
    pub fn default_for(m: usize) -> Option<Self> {
        match m {
            3 => Some(QuantileSource::TailFormula),
            4 => Some(QuantileSource::Published),
            _ => None,
        }
    }

    /// `(p-value, critical value, provenance label)` for an observed `z`.
    pub(crate) fn evaluate(&self, m: usize, t: usize, z: f64, level: f64) -> Result<(f64, f64, String)> {
        match self {
            QuantileSource::TailFormula => {
                if m != 3 {
                    return Err(Error::InvalidParameter("tail formula applies to m = 3 only".into()));
                }
                Ok((tail_formula_p(z), -1.5 * (1.0 - level).ln(), "tail-formula exp(-2z/3)".into()))
            }
            QuantileSource::Published => {
                let table = QuantileTable::published_for(m, t).ok_or_else(|| {
                    Error::InvalidParameter(format!("no published quantiles for m = {m}"))
                })?;
                Ok((table.p_value(z), table.critical(level), "published".into()))
            }
            QuantileSource::Table(table) => {
                if table.m != m {
                    return Err(Error::InvalidParameter(format!(
                        "quantile table is for m = {}, test uses m = {m}",
                        table.m
                    )));
                }
                Ok((table.p_value(z), table.critical(level), table.provenance.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn published_rows() {
        let t = published_table(4, 400).unwrap();
        assert_eq!(t.critical(0.95), 17.39);
        assert_eq!(t.critical(0.999), 27.69);
        assert!(published_table(4, 300).is_none());
        let mid = QuantileTable::published_for(4, 300).unwrap();
        assert!(mid.critical(0.95) > 17.39 && mid.critical(0.95) < 17.64);
        assert_eq!(QuantileTable::published_for(4, 15360).unwrap().critical(0.95), 17.29);
        assert_eq!(QuantileTable::published_for(3, 50).unwrap().critical(0.99), 6.91);
    }

    #[test]
    fn p_value_inverts_critical() {
        let t = published_table(3, 400).unwrap();
        for &(level, z) in t.entries() {
            assert_abs_diff_eq!(t.p_value(z), 1.0 - level, epsilon = 1e-12);
        }
        for level in [0.5, 0.9, 0.97, 0.9999] {
            assert_abs_diff_eq!(t.p_value(t.critical(level)), 1.0 - level, epsilon = 1e-12);
        }
        assert_eq!(t.p_value(0.0), 1.0);
        assert!(t.p_value(30.0) < 1e-3);
    }

    #[test]
    fn tail_formula_row() {
        // the exp(-2z/3) critical values 4.49 / 6.91 / 10.36
        for (level, z) in [(0.95, 4.49), (0.99, 6.91), (0.999, 10.36)] {
            assert_abs_diff_eq!(-1.5 * (1.0f64 - level).ln(), z, epsilon = 0.005);
        }
    }

    #[test]
    fn non_monotone_table_rejected() {
        let r = QuantileTable::new(3, 400, vec![(0.95, 5.0), (0.99, 4.0)], Provenance::Published);
        assert!(r.is_err());
    }

    #[test]
    fn type7_quantile() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_of_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_of_sorted(&s, 1.0), 4.0);
        assert_abs_diff_eq!(quantile_of_sorted(&s, 0.5), 2.5);
    }

    #[test]
    fn simulation_is_reproducible() {
        let a = simulate_quantiles(3, 200, 10_000, 5, &DEFAULT_LEVELS).unwrap();
        let b = simulate_quantiles(3, 200, 10_000, 5, &DEFAULT_LEVELS).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| simulate_quantiles(3, 200, 10_000, 5, &DEFAULT_LEVELS).unwrap());
        assert_eq!(a, c);
        assert!(simulate_quantiles(3, 200, 100, 5, &DEFAULT_LEVELS).is_err());
    }
}
