//! Brute-force reference implementations used by `selftest` and the
//! acceptance suite.
//!
//! Everything here is written as plainly as possible — scalar double loops,
//! no shared helpers with the optimized paths in `fmeval-core` — so a match
//! between the two routes is meaningful evidence, not a tautology.

use fmeval_core::{BinaryMap, Dimensions};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Enhanced-alignment measure evaluated per pixel from the definition:
/// center each map on its mean, combine the centered values via
/// `2ab / (a^2 + b^2)` (0 where both vanish), map through
/// `(1 + x)^2 / 4`, and average. No constant-GT fallback; callers pass
/// non-constant ground truths.
pub fn e_measure_naive(gt: &BinaryMap, fm: &BinaryMap) -> f64 {
    let dims = gt.dimensions();
    assert_eq!(dims, fm.dimensions(), "reference inputs must match");
    let n = dims.pixel_count() as f64;

    let mut gt_sum = 0.0;
    let mut fm_sum = 0.0;
    for y in 0..dims.height() {
        for x in 0..dims.width() {
            gt_sum += gt.get(x, y) as u8 as f64;
            fm_sum += fm.get(x, y) as u8 as f64;
        }
    }
    let gt_mean = gt_sum / n;
    let fm_mean = fm_sum / n;

    let mut total = 0.0;
    for y in 0..dims.height() {
        for x in 0..dims.width() {
            let a = gt.get(x, y) as u8 as f64 - gt_mean;
            let b = fm.get(x, y) as u8 as f64 - fm_mean;
            let denom = a * a + b * b;
            let xi = if denom == 0.0 { 0.0 } else { 2.0 * a * b / denom };
            total += (1.0 + xi) * (1.0 + xi) / 4.0;
        }
    }
    total / n
}

/// Squared Euclidean distance transform by exhaustive search: for every
/// pixel, the minimum squared distance over all foreground pixels.
pub fn squared_edt_naive(fg: &[bool], width: usize, height: usize) -> Vec<f64> {
    let sites: Vec<(f64, f64)> = (0..fg.len())
        .filter(|&i| fg[i])
        .map(|i| ((i % width) as f64, (i / width) as f64))
        .collect();
    (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            sites
                .iter()
                .map(|&(sx, sy)| (x - sx) * (x - sx) + (y - sy) * (y - sy))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Dependency-weighted F-beta evaluated directly from the recipe: raw
/// Gaussian window weights renormalized over the in-image support, an
/// all-pairs distance transform, and scalar accumulation. Callers pass a
/// non-empty ground truth.
pub fn fbw_naive(
    gt: &BinaryMap,
    fm: &BinaryMap,
    beta: f64,
    sigma: f64,
    kernel_radius: i64,
    alpha: f64,
) -> f64 {
    let dims = gt.dimensions();
    assert_eq!(dims, fm.dimensions(), "reference inputs must match");
    let (w, h) = (dims.width() as i64, dims.height() as i64);

    let fg: Vec<bool> = gt.values().to_vec();
    assert!(fg.iter().any(|&v| v), "reference gt must be non-empty");
    let error: Vec<f64> = gt
        .values()
        .iter()
        .zip(fm.values())
        .map(|(&g, &f)| if g != f { 1.0 } else { 0.0 })
        .collect();
    let dist = squared_edt_naive(&fg, w as usize, h as usize);

    let mut fg_count = 0.0;
    let mut weighted_fn = 0.0;
    let mut weighted_fp = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if fg[i] {
                // Gaussian-weighted average of the error over the in-image
                // window; the kernel normalization cancels in the ratio.
                let mut num = 0.0;
                let mut den = 0.0;
                for v in -kernel_radius..=kernel_radius {
                    for u in -kernel_radius..=kernel_radius {
                        let (sx, sy) = (x + u, y + v);
                        if sx < 0 || sy < 0 || sx >= w || sy >= h {
                            continue;
                        }
                        let weight =
                            (-((u * u + v * v) as f64) / (2.0 * sigma * sigma)).exp();
                        num += weight * error[(sy * w + sx) as usize];
                        den += weight;
                    }
                }
                fg_count += 1.0;
                weighted_fn += error[i].min(num / den);
            } else {
                let importance = 2.0 - (alpha * dist[i].sqrt()).exp();
                weighted_fp += error[i] * importance;
            }
        }
    }

    let weighted_tp = fg_count - weighted_fn;
    let precision = if weighted_tp + weighted_fp == 0.0 {
        0.0
    } else {
        weighted_tp / (weighted_tp + weighted_fp)
    };
    let recall = weighted_tp / fg_count;
    let b2 = beta * beta;
    if b2 * precision + recall == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    }
}

/// Random non-constant binary map pair with matching dimensions, sides in
/// `2..=max_side`, and per-map foreground density drawn from `0.15..0.85`.
pub fn random_nonconstant_pair(rng: &mut ChaCha8Rng, max_side: u32) -> (BinaryMap, BinaryMap) {
    let dims = Dimensions::new(
        rng.random_range(2..=max_side),
        rng.random_range(2..=max_side),
    )
    .expect("sides are positive");
    let gt = random_nonconstant_map(rng, dims);
    let fm = random_nonconstant_map(rng, dims);
    (gt, fm)
}

fn random_nonconstant_map(rng: &mut ChaCha8Rng, dims: Dimensions) -> BinaryMap {
    let density = rng.random_range(0.15..0.85);
    let mut values: Vec<bool> = (0..dims.pixel_count())
        .map(|_| rng.random::<f64>() < density)
        .collect();
    if values.iter().all(|&v| v == values[0]) {
        let flip = rng.random_range(0..values.len());
        values[flip] = !values[flip];
    }
    BinaryMap::new(dims, values).expect("length matches dimensions")
}
