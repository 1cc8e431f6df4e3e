//! Classic region measures: F-beta, Jaccard/IoU, and the dependency-weighted
//! F-beta.
//!
//! The weighted variant follows the usual construction: the absolute error
//! field is smoothed inside the ground-truth foreground by a normalized
//! Gaussian dependency kernel, while background false positives are scaled by
//! an importance factor `2 - exp(alpha * d)` driven by the exact Euclidean
//! distance to the nearest foreground pixel. Weighted TP/FP/FN then combine
//! through the same `(1 + beta^2)` ratio as the unweighted measure.

use crate::map::BinaryMap;
use crate::{Error, Score, compensated_sum};

/// Pixel-level agreement counts between a ground truth and a foreground map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Counts the four agreement cases over a map pair.
pub fn confusion(gt: &BinaryMap, fm: &BinaryMap) -> Result<ConfusionCounts, Error> {
    if gt.dimensions() != fm.dimensions() {
        return Err(Error::DimensionMismatch {
            left: gt.dimensions(),
            right: fm.dimensions(),
        });
    }
    let mut counts = ConfusionCounts {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (&g, &f) in gt.values().iter().zip(fm.values()) {
        match (g, f) {
            (true, true) => counts.true_positives += 1,
            (false, true) => counts.false_positives += 1,
            (true, false) => counts.false_negatives += 1,
            (false, false) => counts.true_negatives += 1,
        }
    }
    Ok(counts)
}

/// F-beta over confusion counts. Precision, recall, and the final ratio each
/// fall back to 0 when their denominator vanishes, so batch runs never abort
/// on empty maps; any such fallback sets the degenerate flag.
pub fn f_beta(counts: &ConfusionCounts, beta: f64) -> Score {
    assert!(beta > 0.0, "beta must be positive, got {beta}");
    let tp = counts.true_positives as f64;
    let fp = counts.false_positives as f64;
    let fn_ = counts.false_negatives as f64;
    combine_f_beta(tp, fp, fn_, beta)
}

fn combine_f_beta(tp: f64, fp: f64, fn_: f64, beta: f64) -> Score {
    let mut degenerate = false;
    let precision = if tp + fp == 0.0 {
        degenerate = true;
        0.0
    } else {
        tp / (tp + fp)
    };
    let recall = if tp + fn_ == 0.0 {
        degenerate = true;
        0.0
    } else {
        tp / (tp + fn_)
    };
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        return Score::degenerate(0.0);
    }
    let value = ((1.0 + b2) * precision * recall / denom).clamp(0.0, 1.0);
    Score { value, degenerate }
}

/// Jaccard index / intersection-over-union. Two empty maps agree perfectly
/// and score 1 (flagged degenerate).
pub fn iou_ji(counts: &ConfusionCounts) -> Score {
    let union = counts.true_positives + counts.false_negatives + counts.false_positives;
    if union == 0 {
        return Score::degenerate(1.0);
    }
    Score::clean(counts.true_positives as f64 / union as f64)
}

/// Error-weighting scheme for [`fbw`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FbwWeighting {
    /// Gaussian dependency smoothing inside the foreground plus
    /// distance-based importance scaling of background errors.
    Dependency {
        /// Standard deviation of the dependency kernel.
        sigma: f64,
        /// Kernel half-width in pixels; 3 gives the 7x7 default.
        kernel_radius: usize,
        /// Exponent rate for background importance, `2 - exp(alpha * d)`.
        alpha: f64,
    },
    /// No weighting; reduces the measure to plain [`f_beta`].
    Unit,
}

impl Default for FbwWeighting {
    fn default() -> Self {
        FbwWeighting::Dependency {
            sigma: 5.0,
            kernel_radius: 3,
            alpha: 0.5f64.ln() / 5.0,
        }
    }
}

/// Weighted F-beta of `fm` against `gt`.
///
/// An all-background ground truth leaves the weighting undefined; the score
/// is 0 with the degenerate flag set.
pub fn fbw(gt: &BinaryMap, fm: &BinaryMap, beta: f64, weighting: FbwWeighting) -> Result<Score, Error> {
    assert!(beta > 0.0, "beta must be positive, got {beta}");
    if gt.dimensions() != fm.dimensions() {
        return Err(Error::DimensionMismatch {
            left: gt.dimensions(),
            right: fm.dimensions(),
        });
    }
    let fg_count = gt.count_foreground();
    if fg_count == 0 {
        return Ok(Score::degenerate(0.0));
    }

    let width = gt.dimensions().width() as usize;
    let height = gt.dimensions().height() as usize;
    let error: Vec<f64> = gt
        .values()
        .iter()
        .zip(fm.values())
        .map(|(&g, &f)| if g != f { 1.0 } else { 0.0 })
        .collect();

    let weighted = match weighting {
        FbwWeighting::Unit => error,
        FbwWeighting::Dependency { sigma, kernel_radius, alpha } => {
            weighted_error(gt.values(), &error, width, height, sigma, kernel_radius, alpha)
        }
    };

    let weighted_fn = compensated_sum(
        gt.values()
            .iter()
            .zip(&weighted)
            .filter_map(|(&g, &e)| g.then_some(e)),
    );
    let weighted_fp = compensated_sum(
        gt.values()
            .iter()
            .zip(&weighted)
            .filter_map(|(&g, &e)| (!g).then_some(e)),
    );
    let weighted_tp = (fg_count as f64 - weighted_fn).max(0.0);
    Ok(combine_f_beta(weighted_tp, weighted_fp, weighted_fn, beta))
}

/// Applies the dependency weighting to the error field: inside the
/// foreground the error is capped by its Gaussian-smoothed neighborhood,
/// outside it is scaled by the distance-based importance factor.
fn weighted_error(
    fg: &[bool],
    error: &[f64],
    width: usize,
    height: usize,
    sigma: f64,
    kernel_radius: usize,
    alpha: f64,
) -> Vec<f64> {
    let smoothed = gaussian_smooth(error, width, height, sigma, kernel_radius);
    let squared_dist = squared_edt(fg, width, height);
    error
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            if fg[i] {
                e.min(smoothed[i])
            } else {
                e * (2.0 - (alpha * squared_dist[i].sqrt()).exp())
            }
        })
        .collect()
}

/// 1-D Gaussian taps normalized to unit mass.
fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= total;
    }
    kernel
}

/// Separable Gaussian smoothing, renormalized over the in-image window so a
/// constant field stays constant — bitwise — up to the image border. The
/// rectangular window factors the renormalization into per-axis masses, and
/// each pass divides by its own axis mass with the same summation order, so
/// an all-ones field passes through both stages as exactly 1.0.
fn gaussian_smooth(values: &[f64], width: usize, height: usize, sigma: f64, radius: usize) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma, radius);
    let axis_mass = |len: usize| -> Vec<f64> {
        (0..len)
            .map(|i| {
                let lo = i.saturating_sub(radius);
                let hi = (i + radius).min(len - 1);
                kernel[(lo + radius - i)..=(hi + radius - i)]
                    .iter()
                    .fold(0.0, |acc, &k| acc + k)
            })
            .collect()
    };
    let mass_x = axis_mass(width);
    let mass_y = axis_mass(height);

    let mut horizontal = vec![0.0; values.len()];
    for y in 0..height {
        let row = &values[y * width..(y + 1) * width];
        for x in 0..width {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(width - 1);
            let mut acc = 0.0;
            for u in lo..=hi {
                acc += kernel[u + radius - x] * row[u];
            }
            horizontal[y * width + x] = acc / mass_x[x];
        }
    }
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(height - 1);
        for x in 0..width {
            let mut acc = 0.0;
            for v in lo..=hi {
                acc += kernel[v + radius - y] * horizontal[v * width + x];
            }
            out[y * width + x] = acc / mass_y[y];
        }
    }
    out
}

/// Exact squared Euclidean distance transform: per pixel, the squared
/// distance to the nearest foreground pixel (infinity when there is none).
/// Two 1-D lower-envelope passes, columns then rows; exact because every
/// squared distance is a small integer represented exactly in an `f64`.
pub fn squared_edt(fg: &[bool], width: usize, height: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = fg
        .iter()
        .map(|&v| if v { 0.0 } else { f64::INFINITY })
        .collect();

    let side = width.max(height);
    let mut f = vec![0.0; side];
    let mut d = vec![0.0; side];
    let mut sites = vec![0usize; side];
    let mut bounds = vec![0.0; side + 1];

    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        edt_1d(&f[..height], &mut d[..height], &mut sites, &mut bounds);
        for y in 0..height {
            grid[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        f[..width].copy_from_slice(&grid[y * width..(y + 1) * width]);
        edt_1d(&f[..width], &mut d[..width], &mut sites, &mut bounds);
        grid[y * width..(y + 1) * width].copy_from_slice(&d[..width]);
    }
    grid
}

/// 1-D squared-distance transform via the lower envelope of parabolas
/// rooted at finite input sites. Infinite inputs never enter the envelope.
fn edt_1d(f: &[f64], d: &mut [f64], sites: &mut [usize], bounds: &mut [f64]) {
    let intersect = |p: usize, q: usize| -> f64 {
        let (pf, qf) = (p as f64, q as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf)
    };

    let mut top: Option<usize> = None;
    for (q, &site_value) in f.iter().enumerate() {
        if site_value.is_infinite() {
            continue;
        }
        let Some(mut k) = top else {
            sites[0] = q;
            bounds[0] = f64::NEG_INFINITY;
            bounds[1] = f64::INFINITY;
            top = Some(0);
            continue;
        };
        let mut s = intersect(sites[k], q);
        while s <= bounds[k] {
            k -= 1;
            s = intersect(sites[k], q);
        }
        k += 1;
        sites[k] = q;
        bounds[k] = s;
        bounds[k + 1] = f64::INFINITY;
        top = Some(k);
    }

    if top.is_none() {
        d.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while bounds[k + 1] < q as f64 {
            k += 1;
        }
        let dx = q as f64 - sites[k] as f64;
        *out = dx * dx + f[sites[k]];
    }
}
