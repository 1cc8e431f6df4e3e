//! The `selftest` subcommand: runs the brute-force oracle suite against the
//! optimized measure paths and prints one pass/fail line per check.

use std::io::Write;

use fmeval_core::classic::{self, FbwWeighting};
use fmeval_core::emeasure;
use fmeval_core::{BinaryMap, Dimensions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::reference;

const E_MEASURE_TOLERANCE: f64 = 1e-10;
const FBW_TOLERANCE: f64 = 1e-9;

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

/// Runs every oracle check with `pairs` random map pairs per comparison.
/// Returns true when all checks pass.
pub fn run(seed: u64, pairs: usize, out: &mut dyn Write) -> std::io::Result<bool> {
    let checks = [
        worked_example(),
        e_measure_vs_naive(seed, pairs),
        fbw_vs_naive(seed, pairs),
        edt_vs_naive(seed),
        fbw_unit_weights(seed, pairs.min(25)),
    ];
    let mut all_passed = true;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        writeln!(out, "[selftest] {status} {}: {}", check.name, check.detail)?;
        all_passed &= check.passed;
    }
    Ok(all_passed)
}

fn worked_example() -> Check {
    let dims = Dimensions::new(2, 2).unwrap();
    let gt = BinaryMap::new(dims, vec![true, false, false, false]).unwrap();
    let fm = BinaryMap::new(dims, vec![true, true, false, false]).unwrap();
    let naive = reference::e_measure_naive(&gt, &fm);
    let fast = emeasure::e_measure(&gt, &fm).unwrap().value;
    let passed = (naive - 0.63865).abs() <= 1e-4 && (fast - naive).abs() <= 1e-12;
    Check {
        name: "worked example",
        passed,
        detail: format!("naive={naive:.6}, optimized={fast:.6}, target 0.63865 +- 1e-4"),
    }
}

fn e_measure_vs_naive(seed: u64, pairs: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let (gt, fm) = reference::random_nonconstant_pair(&mut rng, 64);
        let fast = emeasure::e_measure(&gt, &fm).unwrap().value;
        let naive = reference::e_measure_naive(&gt, &fm);
        worst = worst.max((fast - naive).abs());
    }
    Check {
        name: "e-measure vs naive oracle",
        passed: worst <= E_MEASURE_TOLERANCE,
        detail: format!("max |diff| = {worst:.3e} over {pairs} pairs (tol {E_MEASURE_TOLERANCE:.0e})"),
    }
}

fn fbw_vs_naive(seed: u64, pairs: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let alpha = 0.5f64.ln() / 5.0;
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let (gt, fm) = reference::random_nonconstant_pair(&mut rng, 64);
        let fast = classic::fbw(&gt, &fm, 1.0, FbwWeighting::default()).unwrap().value;
        let naive = reference::fbw_naive(&gt, &fm, 1.0, 5.0, 3, alpha);
        worst = worst.max((fast - naive).abs());
    }
    Check {
        name: "weighted f-beta vs naive oracle",
        passed: worst <= FBW_TOLERANCE,
        detail: format!("max |diff| = {worst:.3e} over {pairs} pairs (tol {FBW_TOLERANCE:.0e})"),
    }
}

fn edt_vs_naive(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut worst = 0.0f64;
    let masks = 20;
    for _ in 0..masks {
        let (mask, _) = reference::random_nonconstant_pair(&mut rng, 48);
        let dims = mask.dimensions();
        let (w, h) = (dims.width() as usize, dims.height() as usize);
        let fast = classic::squared_edt(mask.values(), w, h);
        let naive = reference::squared_edt_naive(mask.values(), w, h);
        for (a, b) in fast.iter().zip(&naive) {
            worst = worst.max((a - b).abs());
        }
    }
    Check {
        name: "distance transform vs exhaustive search",
        passed: worst == 0.0,
        detail: format!("max |diff| = {worst:.3e} over {masks} masks (exact match required)"),
    }
}

fn fbw_unit_weights(seed: u64, pairs: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let (gt, fm) = reference::random_nonconstant_pair(&mut rng, 32);
        let unit = classic::fbw(&gt, &fm, 1.0, FbwWeighting::Unit).unwrap().value;
        let plain = classic::f_beta(&classic::confusion(&gt, &fm).unwrap(), 1.0).value;
        worst = worst.max((unit - plain).abs());
    }
    Check {
        name: "unit-weight fbw equals f-beta",
        passed: worst <= 1e-12,
        detail: format!("max |diff| = {worst:.3e} over {pairs} pairs (tol 1e-12)"),
    }
}
