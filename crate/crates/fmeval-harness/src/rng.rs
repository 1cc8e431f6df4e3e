//! Seedable, portable randomness.
//!
//! All harness randomness flows through ChaCha8 streams keyed by
//! `(master seed, label)`, where the label is hashed with FNV-1a — a fixed
//! algorithm, unlike the standard library hasher, so streams never move
//! between releases or platforms. Normal deviates come from the Box-Muller
//! transform rather than a library sampler for the same reason: frozen
//! regression values must not depend on a dependency's internals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// Stable 64-bit stream seed for a `(master, label)` work item.
pub fn stream_seed(master: u64, label: &str) -> u64 {
    let mut hash = FNV_OFFSET;
    for byte in master.to_le_bytes() {
        hash = (hash ^ u64::from(byte)).wrapping_mul(FNV_PRIME);
    }
    for &byte in label.as_bytes() {
        hash = (hash ^ u64::from(byte)).wrapping_mul(FNV_PRIME);
    }
    hash
}

/// ChaCha8 stream for a `(master, label)` work item.
pub fn stream_rng(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, label))
}

/// Standard normal deviate via Box-Muller: `sqrt(-2 ln u1) * cos(2 pi u2)`
/// with `u1` drawn from `(0, 1]`.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
