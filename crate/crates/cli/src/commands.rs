use std::env;
use std::fs;
use std::path::PathBuf;

use ordpat::contrasts::{contrast_vs_delay, sliding_contrast, SlidingSpec};
use ordpat::nulls::{
    batch_test_with, read_cache, simulate_quantiles, write_cache, QuantileSource, QuantileTable,
};
use ordpat::processes::{generate, ProcessKind, ProcessSpec};
use ordpat::patterns::count_patterns;
use ordpat::{Error, Pattern, Result, TimeSeries, WindowSpec};

use crate::input::read_series;
use crate::reproduce;
use crate::table::Table;
use crate::{Command, Failure, Format, InputArgs, OutputArgs, ProcessArg};

pub const CACHE_ENV: &str = "ORDPAT_CACHE_DIR";
const CACHE_FILE: &str = "quantiles.tsv";

pub fn run(cmd: Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Freq { io, m, delay, ties } => {
            let x = load(&io)?;
            let mut t = Table::new(vec!["d", "pattern", "index", "count", "p"]);
            for d in delay.delays() {
                let counts = count_patterns(&x, WindowSpec::new(m, d)?, ties.policy())?;
                let n = counts.valid();
                for p in Pattern::all(m) {
                    let k = counts.counts[p.index()];
                    t.push(vec![
                        d.into(),
                        p.to_string().into(),
                        p.index().into(),
                        k.into(),
                        (k as f64 / n as f64).into(),
                    ]);
                }
            }
            emit(&t, &io.out)?;
        }
        Command::Contrasts { io, dmax, ties } => {
            let x = load(&io)?;
            let mut t = Table::new(vec!["d", "beta", "tau", "gamma", "delta", "alpha", "delta2"]);
            for (d, c) in contrast_vs_delay(&x, 3, dmax, ties.policy())? {
                t.push(vec![
                    d.into(),
                    c.beta.into(),
                    c.tau.into(),
                    c.gamma.into(),
                    c.delta.into(),
                    c.alpha.into(),
                    c.delta2.into(),
                ]);
            }
            emit(&t, &io.out)?;
        }
        Command::Track { io, d, epoch, hop, smooth, ties } => {
            let x = load(&io)?;
            let spec = SlidingSpec {
                window: WindowSpec::new(3, d)?,
                epoch_len: epoch,
                hop: hop.unwrap_or(epoch),
                smoothing_len: smooth,
                ties: ties.policy(),
            };
            let mut t = Table::new(vec![
                "epoch",
                "start",
                "valid_windows",
                "skipped_windows",
                "alpha",
                "tau",
                "beta",
                "gamma",
                "delta",
                "smoothed_alpha",
                "edge_truncated",
            ]);
            for e in sliding_contrast(&x, spec)? {
                let c = e.contrasts;
                t.push(vec![
                    e.epoch.into(),
                    e.start.into(),
                    e.valid_windows.into(),
                    e.skipped_windows.into(),
                    c.map(|c| c.alpha).into(),
                    c.map(|c| c.tau).into(),
                    c.map(|c| c.beta).into(),
                    c.map(|c| c.gamma).into(),
                    c.map(|c| c.delta).into(),
                    e.smoothed_alpha.into(),
                    e.edge_truncated.into(),
                ]);
            }
            emit(&t, &io.out)?;
        }
        Command::Test { io, m, dmax, level, epoch, summary } => {
            let x = load(&io)?;
            let (segments, seg_len) = split(&x, epoch)?;
            let cached = load_cached_tables()?;
            let source_for = |m: usize| {
                // a cached simulation at the nominal window count beats the defaults
                let n = seg_len.checked_sub(m - 1)?;
                cached
                    .iter()
                    .find(|t| t.m == m && t.t == n)
                    .map(|t| QuantileSource::Table(t.clone()))
                    .or_else(|| QuantileSource::default_for(m))
            };
            let report = batch_test_with(&segments, &m, dmax, level, source_for)?;
            let t = if summary {
                let mut t = Table::new(vec![
                    "statistic",
                    "level",
                    "tests",
                    "missing",
                    "accepted_pct",
                    "larger_pct",
                    "smaller_pct",
                ]);
                for c in &report.cells {
                    t.push(vec![
                        c.statistic.to_string().into(),
                        report.level.into(),
                        c.tests.into(),
                        c.missing.into(),
                        c.accepted_pct.into(),
                        c.larger_pct.into(),
                        c.smaller_pct.into(),
                    ]);
                }
                t
            } else {
                let mut t = Table::new(vec![
                    "segment",
                    "start",
                    "statistic",
                    "d",
                    "value",
                    "null_mean",
                    "null_sd",
                    "critical",
                    "p_value",
                    "level",
                    "decision",
                    "provenance",
                ]);
                for (seg, r) in &report.reports {
                    t.push(vec![
                        (*seg).into(),
                        (seg * seg_len).into(),
                        r.statistic.to_string().into(),
                        r.d.into(),
                        r.value.into(),
                        r.null_mean.into(),
                        r.null_sd.into(),
                        r.critical.into(),
                        r.p_value.into(),
                        r.level.into(),
                        r.decision.to_string().into(),
                        r.provenance.clone().into(),
                    ]);
                }
                t
            };
            emit(&t, &io.out)?;
        }
        Command::Simulate { process, noise, phi, t, seed, out } => {
            let kind = match process {
                ProcessArg::White => ProcessKind::WhiteNoise,
                ProcessArg::Rw => ProcessKind::SymmetricRandomWalk,
                ProcessArg::Gbm => ProcessKind::GeometricBm,
                ProcessArg::Ar1 => ProcessKind::Ar1 { phi },
            };
            let x = generate(ProcessSpec::new(kind, noise, seed), t)?;
            // single column, so the file feeds straight back into --input
            let mut tab = Table::new(vec!["x"]);
            for &v in x.values() {
                tab.push(vec![v.into()]);
            }
            emit(&tab, &out)?;
        }
        Command::Quantiles { m, t, reps, seed, levels, out } => {
            let table = simulate_quantiles(m, t, reps, seed, &levels)?;
            write_cache(&cache_path(), &table)?;
            emit(&quantile_rows(&table), &out)?;
        }
        Command::Reproduce { table, seed, reps, out } => {
            let rows = reproduce::run(table, seed, reps)?;
            let all_pass = rows.iter().all(|r| r.pass);
            emit(&reproduce::to_table(&rows), &out)?;
            if !all_pass {
                return Err(Failure::ReproductionFailed);
            }
        }
    }
    Ok(())
}

fn load(io: &InputArgs) -> Result<TimeSeries> {
    read_series(&io.input, io.column)
}

/// Disjoint segments of length `epoch`, or the whole series.
fn split(x: &TimeSeries, epoch: Option<usize>) -> Result<(Vec<TimeSeries>, usize)> {
    let Some(len) = epoch else {
        return Ok((vec![x.clone()], x.len()));
    };
    if len == 0 || len > x.len() {
        return Err(Error::InvalidParameter(format!(
            "segment length {len} must lie in 1..={}",
            x.len()
        )));
    }
    let segs = x
        .values()
        .chunks_exact(len)
        .map(|c| TimeSeries::new(c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((segs, len))
}

pub fn cache_path() -> PathBuf {
    let dir = match env::var_os(CACHE_ENV) {
        Some(d) => PathBuf::from(d),
        None => match env::var_os("HOME") {
            Some(h) => PathBuf::from(h).join(".cache").join("ordpat"),
            None => PathBuf::from(".ordpat-cache"),
        },
    };
    dir.join(CACHE_FILE)
}

fn load_cached_tables() -> Result<Vec<QuantileTable>> {
    read_cache(&cache_path())
}

fn quantile_rows(table: &QuantileTable) -> Table {
    let mut t = Table::new(vec!["m", "t", "level", "z", "provenance"]);
    for &(level, z) in table.entries() {
        t.push(vec![
            table.m.into(),
            table.t.into(),
            level.into(),
            z.into(),
            table.provenance.to_string().into(),
        ]);
    }
    t
}

fn emit(t: &Table, out: &OutputArgs) -> Result<()> {
    let text = match out.format {
        Format::Csv => t.to_csv(),
        Format::Json => t.to_json(),
    };
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
