//! Plain-text quantile cache.
//!
//! ```text
//! # ordpat quantile cache v1
//! m T level z seed n_reps
//! 4 400 0.95 17.41 7 100000
//! ```
//!
//! One row per `(m, T, level)`, with tab-separated columns (shown as spaces
//! above) and `T` counted in windows. Writing a table
//! replaces all rows with the same `(m, T)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::quantiles::{Provenance, QuantileTable};
use crate::error::{Error, Result};

pub const CACHE_HEADER: &str = "# ordpat quantile cache v1";
const COLUMNS: &str = "m\tT\tlevel\tz\tseed\tn_reps";

type Key = (usize, usize, u64, usize);

fn parse_rows(text: &str) -> Result<BTreeMap<Key, Vec<(f64, f64)>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == CACHE_HEADER => {}
        _ => return Err(Error::Parse(format!("quantile cache must start with {CACHE_HEADER:?}"))),
    }
    let mut groups: BTreeMap<Key, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == COLUMNS {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let bad = || Error::Parse(format!("quantile cache line {}: {line:?}", i + 1));
        if f.len() != 6 {
            return Err(bad());
        }
        let m = f[0].parse().map_err(|_| bad())?;
        let t = f[1].parse().map_err(|_| bad())?;
        let level: f64 = f[2].parse().map_err(|_| bad())?;
        let z: f64 = f[3].parse().map_err(|_| bad())?;
        let seed = f[4].parse().map_err(|_| bad())?;
        let n_reps = f[5].parse().map_err(|_| bad())?;
        groups.entry((m, t, seed, n_reps)).or_default().push((level, z));
    }
    Ok(groups)
}

/// Reads every table in the cache; a missing file yields an empty list.
pub fn read_cache(path: &Path) -> Result<Vec<QuantileTable>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    parse_rows(&text)?
        .into_iter()
        .map(|((m, t, seed, n_reps), entries)| {
            QuantileTable::new(m, t, entries, Provenance::Simulated { seed, n_reps })
        })
        .collect()
}

/// Inserts a simulated table, replacing any cached table with the same `(m, T)`.
pub fn write_cache(path: &Path, table: &QuantileTable) -> Result<()> {
    let Provenance::Simulated { seed, n_reps } = table.provenance else {
        return Err(Error::InvalidParameter("only simulated tables are cached".into()));
    };
    let mut groups = match fs::read_to_string(path) {
        Ok(t) => parse_rows(&t)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
        Err(e) => return Err(e.into()),
    };
    groups.retain(|&(m, t, _, _), _| (m, t) != (table.m, table.t));
    groups.insert((table.m, table.t, seed, n_reps), table.entries().to_vec());

    let mut out = format!("{CACHE_HEADER}\n{COLUMNS}\n");
    for ((m, t, seed, n_reps), entries) in &groups {
        for (level, z) in entries {
            out.push_str(&format!("{m}\t{t}\t{level}\t{z}\t{seed}\t{n_reps}\n"));
        }
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, out)?;
    Ok(())
}
