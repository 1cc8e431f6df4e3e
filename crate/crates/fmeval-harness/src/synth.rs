//! Synthetic map and corpus generation: the centered generic circle, binary
//! Gaussian noise maps, morphological and noise perturbations, and the
//! desk-scale disk/blob corpus used by the meta-measure protocols.

use fmeval_core::{BinaryMap, Dimensions, GrayMap};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::meta::CandidateSet;
use crate::rng::{standard_normal, stream_rng};
use crate::Error;

/// Default radius of the generic circle as a fraction of `min(w, h)`.
pub const GENERIC_RADIUS_FRACTION: f64 = 0.25;

/// Filled disk centered on the grid, radius `min(w, h) / 4`. Pixel centers
/// sit at `(x + 0.5, y + 0.5)` and the disk center at `(w/2, h/2)`, so the
/// output is exactly mirror-symmetric in both axes.
pub fn generic_circle(dims: Dimensions) -> BinaryMap {
    generic_circle_with(dims, GENERIC_RADIUS_FRACTION)
}

/// [`generic_circle`] with a configurable radius fraction.
pub fn generic_circle_with(dims: Dimensions, radius_fraction: f64) -> BinaryMap {
    let radius = dims.width().min(dims.height()) as f64 * radius_fraction;
    let cx = dims.width() as f64 / 2.0;
    let cy = dims.height() as f64 / 2.0;
    disk(dims, cx, cy, radius)
}

fn disk(dims: Dimensions, cx: f64, cy: f64, radius: f64) -> BinaryMap {
    BinaryMap::from_fn(dims, |x, y| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        dx * dx + dy * dy <= radius * radius
    })
}

/// Distribution parameters for the Gaussian noise map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub mean: f64,
    pub std_dev: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { mean: 0.5, std_dev: 0.15 }
    }
}

/// The gray stage of the noise map: i.i.d. normal samples clamped to
/// `[0, 1]`, deterministic per seed.
pub fn gaussian_noise_gray(dims: Dimensions, seed: u64, config: NoiseConfig) -> GrayMap {
    let mut rng = stream_rng(seed, "noise-map");
    let values: Vec<f64> = (0..dims.pixel_count())
        .map(|_| (config.mean + config.std_dev * standard_normal(&mut rng)).clamp(0.0, 1.0))
        .collect();
    GrayMap::new(dims, values).expect("clamped values are in range")
}

/// Binary Gaussian noise map: the gray noise field pushed through the same
/// adaptive binarizer as any model map. With the default parameters the
/// adaptive threshold lands near saturation, so the result is sparse.
pub fn gaussian_noise_map(dims: Dimensions, seed: u64) -> BinaryMap {
    gaussian_noise_map_with(dims, seed, NoiseConfig::default())
}

/// [`gaussian_noise_map`] with explicit distribution parameters.
pub fn gaussian_noise_map_with(dims: Dimensions, seed: u64, config: NoiseConfig) -> BinaryMap {
    gaussian_noise_gray(dims, seed, config).binarize_adaptive()
}

/// A deterministic map perturbation. Magnitudes are bounded by the contract
/// that a non-constant input must stay non-constant; violating it is an
/// error, not a silent degradation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Morphological dilation by a square structuring element of the given
    /// radius.
    Dilate(u32),
    /// Morphological erosion by a square structuring element.
    Erode(u32),
    /// Translation; pixels shifted in from outside are background.
    Shift { dx: i32, dy: i32 },
    /// Independent per-pixel flips at `rate / 1000`.
    FlipNoise { rate_per_mille: u32 },
}

/// Applies a perturbation. Only `FlipNoise` consumes randomness; the stream
/// is derived from `(seed, "perturb")` so the same seed reproduces the same
/// flips.
pub fn perturb(src: &BinaryMap, kind: Perturbation, seed: u64) -> Result<BinaryMap, Error> {
    let out = match kind {
        Perturbation::Dilate(radius) => morphology(src, radius, true),
        Perturbation::Erode(radius) => morphology(src, radius, false),
        Perturbation::Shift { dx, dy } => shift(src, dx, dy),
        Perturbation::FlipNoise { rate_per_mille } => {
            flip_noise(src, rate_per_mille, &mut stream_rng(seed, "perturb"))
        }
    };
    if src.constant_value().is_none() && out.constant_value().is_some() {
        return Err(Error::PerturbDegenerate);
    }
    Ok(out)
}

fn morphology(src: &BinaryMap, radius: u32, dilate: bool) -> BinaryMap {
    if radius == 0 {
        return src.clone();
    }
    let dims = src.dimensions();
    let (w, h) = (dims.width() as i64, dims.height() as i64);
    let r = radius as i64;
    BinaryMap::from_fn(dims, |x, y| {
        let (x, y) = (x as i64, y as i64);
        let mut acc = !dilate;
        'window: for v in (y - r).max(0)..=(y + r).min(h - 1) {
            for u in (x - r).max(0)..=(x + r).min(w - 1) {
                let px = src.get(u as u32, v as u32);
                if dilate && px {
                    acc = true;
                    break 'window;
                }
                if !dilate && !px {
                    acc = false;
                    break 'window;
                }
            }
        }
        acc
    })
}

fn shift(src: &BinaryMap, dx: i32, dy: i32) -> BinaryMap {
    let dims = src.dimensions();
    let (w, h) = (dims.width() as i64, dims.height() as i64);
    BinaryMap::from_fn(dims, |x, y| {
        let sx = x as i64 - dx as i64;
        let sy = y as i64 - dy as i64;
        (0..w).contains(&sx) && (0..h).contains(&sy) && src.get(sx as u32, sy as u32)
    })
}

fn flip_noise(src: &BinaryMap, rate_per_mille: u32, rng: &mut ChaCha8Rng) -> BinaryMap {
    let rate = rate_per_mille as f64 / 1000.0;
    let values = src
        .values()
        .iter()
        .map(|&v| if rng.random::<f64>() < rate { !v } else { v })
        .collect();
    BinaryMap::new(src.dimensions(), values).expect("length preserved")
}

/// Configuration for the synthetic disk/blob corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub images: usize,
    pub dims: Dimensions,
    pub seed: u64,
}

/// Per-image perturbation recipes for the three synthetic "model" maps.
/// Flip rates stay at or below 2% and shifts within 2 px so the maps remain
/// close to their ground truth, like real detector output.
const MODEL_NAMES: [&str; 3] = ["sota_a", "sota_b", "sota_c"];

/// Generates the deterministic synthetic corpus: one disk or multi-disk blob
/// ground truth per image plus three mildly perturbed model maps.
pub fn generate_corpus(config: &SynthConfig) -> Result<Vec<CandidateSet>, Error> {
    if config.images == 0 {
        return Err(Error::EmptyCorpus);
    }
    if config.dims.width() < 8 || config.dims.height() < 8 {
        return Err(Error::CorpusTooSmall(config.dims));
    }
    (0..config.images)
        .map(|index| {
            let image_id = format!("img{index:04}");
            let gt = random_blob(config.dims, config.seed, &image_id);
            let models = MODEL_NAMES
                .iter()
                .enumerate()
                .map(|(slot, name)| {
                    let label = format!("{image_id}/{name}");
                    let fm = perturbed_model(&gt, slot, config.seed, &label);
                    (name.to_string(), fm)
                })
                .collect();
            CandidateSet::new(image_id, gt, models)
        })
        .collect()
}

/// Ground truth for one synthetic image: a single disk or a blob made from
/// two to four overlapping disks, with radii scaled to the grid.
fn random_blob(dims: Dimensions, seed: u64, image_id: &str) -> BinaryMap {
    let mut rng = stream_rng(seed, &format!("{image_id}/gt"));
    let (w, h) = (dims.width() as f64, dims.height() as f64);
    let min_side = w.min(h);
    let max_radius = (min_side / 4.0).max(5.0);
    let min_radius = (min_side / 8.0).max(4.0);

    let disks = if rng.random::<f64>() < 0.5 { 1 } else { rng.random_range(2..=4) };
    let base_x = rng.random_range(0.3..0.7) * w;
    let base_y = rng.random_range(0.3..0.7) * h;

    let mut centers = Vec::with_capacity(disks);
    for i in 0..disks {
        let radius = rng.random_range(min_radius..=max_radius);
        let (cx, cy) = if i == 0 {
            (base_x, base_y)
        } else {
            // Overlap the base disk so the blob stays connected.
            (
                base_x + rng.random_range(-0.8..0.8) * radius,
                base_y + rng.random_range(-0.8..0.8) * radius,
            )
        };
        centers.push((cx, cy, radius));
    }

    BinaryMap::from_fn(dims, |x, y| {
        centers.iter().any(|&(cx, cy, r)| {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            dx * dx + dy * dy <= r * r
        })
    })
}

/// One synthetic model map: a slot-specific morphological or shift error
/// plus a little flip noise. Retries with a bumped stream on the (very
/// unlikely) degenerate outcome and falls back to the ground truth itself.
fn perturbed_model(gt: &BinaryMap, slot: usize, seed: u64, label: &str) -> BinaryMap {
    for attempt in 0..8u64 {
        let attempt_label = format!("{label}/attempt{attempt}");
        let stream = crate::rng::stream_seed(seed, &attempt_label);
        let mut rng = stream_rng(seed, &format!("{attempt_label}/shape"));
        let shaped = match slot {
            0 => perturb(gt, Perturbation::Dilate(1), stream),
            1 => perturb(gt, Perturbation::Erode(1), stream),
            _ => {
                let dx = rng.random_range(-2..=2);
                let dy = rng.random_range(-2..=2);
                perturb(gt, Perturbation::Shift { dx, dy }, stream)
            }
        };
        let flip_rate = if slot == 2 { 20 } else { 10 };
        let noisy = shaped.and_then(|m| {
            perturb(&m, Perturbation::FlipNoise { rate_per_mille: flip_rate }, stream)
        });
        if let Ok(map) = noisy {
            return map;
        }
    }
    gt.clone()
}
