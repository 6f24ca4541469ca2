use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ordpat::processes::{generate, Noise, ProcessKind, ProcessSpec};
use serde_json::Value;
use tempfile::TempDir;

fn ordpat(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordpat"))
        .args(args)
        .env("ORDPAT_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cache: &Path) -> String {
    let out = ordpat(args, cache);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_series(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let body: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(&path, format!("value\n{body}")).unwrap();
    path
}

fn series(kind: ProcessKind, t: usize, seed: u64) -> Vec<f64> {
    generate(ProcessSpec::new(kind, Noise::Normal, seed), t).unwrap().into_values()
}

/// Parses CSV output into header and rows of fields.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<String> {
    let (h, rows) = csv(text);
    let k = h.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.into_iter().map(|r| r[k].clone()).collect()
}

fn summary_cell(text: &str, stat: &str, col: &str) -> f64 {
    let (h, rows) = csv(text);
    let k = h.iter().position(|c| c == col).unwrap();
    let row = rows.iter().find(|r| r[0] == stat).unwrap_or_else(|| panic!("no row {stat}"));
    row[k].parse().unwrap()
}

#[test]
fn six_point_example_frequencies() {
    let dir = TempDir::new().unwrap();
    let f = write_series(dir.path(), "six.csv", &[1.0, 2.0, 0.0, 1.5, -1.0, 3.0]);
    let f = f.to_str().unwrap();
    let out = ok(&["freq", "--input", f, "--m", "3", "--d", "1"], dir.path());
    let p: Vec<String> = column(&out, "p");
    let pat = column(&out, "pattern");
    let get = |name: &str| -> f64 { p[pat.iter().position(|x| x == name).unwrap()].parse().unwrap() };
    assert_eq!(get("231"), 0.5);
    assert_eq!(get("213"), 0.25);
    assert_eq!(get("312"), 0.25);
    assert_eq!(get("123") + get("132") + get("321"), 0.0);

    let json = ok(&["freq", "--input", f, "--dmax", "2", "--format", "json"], dir.path());
    let v: Value = serde_json::from_str(&json).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 12);
    let find = |d: u64, pat: &str| {
        rows.iter().find(|r| r["d"] == d && r["pattern"] == pat).unwrap()["p"].as_f64().unwrap()
    };
    assert_eq!(find(2, "231"), 0.0);
    assert_eq!(find(2, "213"), 0.5);
    assert_eq!(find(2, "321"), 0.5);
    // JSON keys follow the CSV column order
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["d", "pattern", "index", "count", "p"]);
}

#[test]
fn input_errors_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = ordpat(&["freq", "--input", empty.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let nan = dir.path().join("nan.csv");
    fs::write(&nan, "value\n1\n2\nNaN\n4\n").unwrap();
    let out = ordpat(&["freq", "--input", nan.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let missing = dir.path().join("missing.csv");
    let out = ordpat(&["freq", "--input", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = ordpat(&["reproduce", "no-such-table"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precondition_violations_exit_with_code_3() {
    let dir = TempDir::new().unwrap();
    let short = write_series(dir.path(), "short.csv", &[1.0, 2.0]);
    let out = ordpat(&["freq", "--input", short.to_str().unwrap(), "--m", "3"], dir.path());
    assert_eq!(out.status.code(), Some(3));

    let x = write_series(dir.path(), "x.csv", &series(ProcessKind::WhiteNoise, 1000, 1));
    let out = ordpat(&["track", "--input", x.to_str().unwrap(), "--epoch", "100"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = ordpat(&["test", "--input", x.to_str().unwrap(), "--level", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn track_detects_regime_shift() {
    let dir = TempDir::new().unwrap();
    // white noise (turning rate 2/3) followed by a random walk (turning rate 1/2)
    let mut x = series(ProcessKind::WhiteNoise, 8000, 11);
    x.extend(series(ProcessKind::SymmetricRandomWalk, 8000, 12));
    let f = write_series(dir.path(), "regimes.csv", &x);
    let out = ok(&["track", "--input", f.to_str().unwrap(), "--epoch", "200", "--smooth", "5"], dir.path());
    let a: Vec<f64> = column(&out, "smoothed_alpha").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(a.len(), 80);
    let early = a[2..38].iter().sum::<f64>() / 36.0;
    let late = a[42..78].iter().sum::<f64>() / 36.0;
    assert!((early - 2.0 / 3.0).abs() < 0.02, "early {early}");
    assert!((late - 0.5).abs() < 0.02, "late {late}");
    assert!(a[2..38].iter().all(|&v| v > 0.6));
    assert!(a[42..78].iter().all(|&v| v < 0.57));
}

#[test]
fn random_walk_persistence_is_scale_free() {
    let dir = TempDir::new().unwrap();
    let f = write_series(dir.path(), "rw.csv", &series(ProcessKind::SymmetricRandomWalk, 200_000, 5));
    let out = ok(&["contrasts", "--input", f.to_str().unwrap(), "--dmax", "10"], dir.path());
    let tau = column(&out, "tau");
    assert_eq!(tau.len(), 10);
    for t in tau {
        let t: f64 = t.parse().unwrap();
        assert!((t - 1.0 / 6.0).abs() < 0.01, "tau {t}");
    }
}

#[test]
fn hop_equal_to_epoch_is_disjoint_analysis() {
    let dir = TempDir::new().unwrap();
    let x = series(ProcessKind::Ar1 { phi: 0.5 }, 1000, 21);
    let f = write_series(dir.path(), "ar.csv", &x);
    let f = f.to_str().unwrap();
    let default = ok(&["track", "--input", f, "--epoch", "250"], dir.path());
    let explicit = ok(&["track", "--input", f, "--epoch", "250", "--hop", "250"], dir.path());
    assert_eq!(default, explicit);
    let alphas = column(&default, "alpha");
    assert_eq!(alphas.len(), 4);
    for (k, alpha) in alphas.iter().enumerate() {
        let part = write_series(dir.path(), "part.csv", &x[250 * k..250 * (k + 1)]);
        let c = ok(&["contrasts", "--input", part.to_str().unwrap()], dir.path());
        assert_eq!(&column(&c, "alpha")[0], alpha);
    }
}

#[test]
fn iid_input_is_mostly_accepted() {
    let dir = TempDir::new().unwrap();
    let f = write_series(dir.path(), "iid.csv", &series(ProcessKind::WhiteNoise, 400 * 400, 31));
    let out = ok(
        &["test", "--input", f.to_str().unwrap(), "--epoch", "400", "--m", "3,4", "--summary"],
        dir.path(),
    );
    for stat in ["H3", "H4", "tau", "beta", "gamma", "delta", "tau4", "beta4"] {
        let acc = summary_cell(&out, stat, "accepted_pct");
        assert!((91.0..=99.0).contains(&acc), "{stat}: {acc}% accepted");
    }
}

#[test]
fn random_walk_fails_entropy_test() {
    let dir = TempDir::new().unwrap();
    let f = write_series(dir.path(), "rw.csv", &series(ProcessKind::SymmetricRandomWalk, 20 * 800, 41));
    let out = ok(&["test", "--input", f.to_str().unwrap(), "--epoch", "800", "--m", "4", "--summary"], dir.path());
    assert_eq!(summary_cell(&out, "H4", "accepted_pct"), 0.0);
    assert_eq!(summary_cell(&out, "H4", "larger_pct"), 100.0);
}

#[test]
fn provenance_follows_the_quantile_cache() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let f = write_series(dir.path(), "iid.csv", &series(ProcessKind::WhiteNoise, 800, 51));
    let f = f.to_str().unwrap();
    let args = ["test", "--input", f, "--epoch", "400", "--m", "3,4", "--format", "json"];
    let before = ok(&args, &cache);
    let prov = |text: &str, stat: &str| -> Vec<String> {
        let v: Value = serde_json::from_str(text).unwrap();
        v.as_array()
            .unwrap()
            .iter()
            .filter(|r| r["statistic"] == stat)
            .map(|r| r["provenance"].as_str().unwrap().to_string())
            .collect()
    };
    assert!(prov(&before, "H4").iter().all(|p| p == "published"));
    assert!(prov(&before, "H3").iter().all(|p| p.starts_with("tail-formula")));
    assert!(prov(&before, "tau").iter().all(|p| p.starts_with("normal")), "{before}");

    ok(&["quantiles", "--m", "4", "--t", "397", "--reps", "10000", "--seed", "9"], &cache);
    assert!(cache.join("quantiles.tsv").exists());
    let after = ok(&args, &cache);
    assert!(prov(&after, "H4").iter().all(|p| p == "simulated(seed=9,reps=10000)"), "{after}");
    assert!(prov(&after, "H3").iter().all(|p| p.starts_with("tail-formula")));
}

#[test]
fn reproductions_pass() {
    let dir = TempDir::new().unwrap();
    for table in ["coin", "brown3", "tailq"] {
        let out = ordpat(&["reproduce", table], dir.path());
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(out.status.code(), Some(0), "{table}:\n{text}");
        let status = column(&text, "status");
        assert!(!status.is_empty());
        assert!(status.iter().all(|s| s == "PASS"), "{text}");
    }
}

#[test]
fn commands_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let sim = ["simulate", "--process", "ar1", "--noise", "exponential", "--t", "3000", "--seed", "7"];
    let a = ok(&sim, dir.path());
    assert_eq!(a, ok(&sim, dir.path()));
    assert_ne!(a, ok(&["simulate", "--process", "ar1", "--noise", "exponential", "--t", "3000", "--seed", "8"], dir.path()));

    // simulated output reads back losslessly
    let f = dir.path().join("sim.csv");
    fs::write(&f, &a).unwrap();
    let f = f.to_str().unwrap();
    let test = ["test", "--input", f, "--m", "3,4", "--dmax", "3"];
    assert_eq!(ok(&test, dir.path()), ok(&test, dir.path()));

    let tied: Vec<f64> = (0..600).map(|i| ((i * 37) % 11) as f64).collect();
    let t = write_series(dir.path(), "tied.csv", &tied);
    let jit = ["freq", "--input", t.to_str().unwrap(), "--ties", "jitter", "--seed", "3"];
    let j = ok(&jit, dir.path());
    assert_eq!(j, ok(&jit, dir.path()));
    let counts: u64 = column(&j, "count").iter().map(|c| c.parse::<u64>().unwrap()).sum();
    assert_eq!(counts, 598);
}

#[test]
fn simulate_then_analyse() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("gbm.json");
    ok(&["simulate", "--process", "gbm", "--t", "500", "--format", "json", "--out", out.to_str().unwrap()], dir.path());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 500);
    assert!(v[0]["x"].as_f64().unwrap() > 0.0);
}
