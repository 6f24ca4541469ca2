//! Deterministic seeding for Monte Carlo replicates.
//!
//! Replicate `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. ChaCha streams are
//! independent counter-based sequences, so a replicate's numbers depend only
//! on `(s, i)` and never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Generator for replicate `index` of a run seeded with `master`.
pub fn replicate_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Fills `buf` with standard normal white noise.
pub fn fill_white_noise(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    for x in buf.iter_mut() {
        *x = StandardNormal.sample(rng);
    }
}

/// Fills `buf` with a Gaussian random walk started at 0 (the first value is
/// the first increment).
pub fn fill_gaussian_walk(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    let mut level = 0.0;
    for x in buf.iter_mut() {
        let step: f64 = StandardNormal.sample(rng);
        level += step;
        *x = level;
    }
}
