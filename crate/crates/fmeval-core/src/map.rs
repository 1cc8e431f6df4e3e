//! Pixel-map types: loading, validation, binarization, and resampling.
//!
//! Maps are stored row-major with `(x, y)` addressing column and row, so the
//! pixel at `(x, y)` lives at index `y * width + x`. Gray values are reals in
//! `[0, 1]`; binary values are plain `bool`s, which makes the "every value is
//! exactly 0 or 1" invariant hold by construction.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, compensated_sum};

/// Clamp applied to the adaptive threshold so a near-saturated map does not
/// binarize to all-background.
pub const ADAPTIVE_CLAMP_EPSILON: f64 = 1e-9;

/// Width and height of a pixel grid, both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimensions {
    width: u32,
    height: u32,
}

impl Dimensions {
    pub fn new(width: u32, height: u32) -> Result<Self, Error> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Dimensions { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

impl fmt::Display for Dimensions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Parses `"WxH"`, e.g. `64x64`.
impl FromStr for Dimensions {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (w, h) = s.split_once(['x', 'X']).ok_or(Error::ZeroDimension)?;
        let width = w.trim().parse::<u32>().map_err(|_| Error::ZeroDimension)?;
        let height = h.trim().parse::<u32>().map_err(|_| Error::ZeroDimension)?;
        Dimensions::new(width, height)
    }
}

/// Real-valued pixel grid with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    dims: Dimensions,
    values: Vec<f64>,
}

impl GrayMap {
    pub fn new(dims: Dimensions, values: Vec<f64>) -> Result<Self, Error> {
        if values.len() != dims.pixel_count() {
            return Err(Error::LengthMismatch { dims, actual: values.len() });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ValueOutOfRange { index, value });
            }
        }
        Ok(GrayMap { dims, values })
    }

    pub fn dimensions(&self) -> Dimensions {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.dims.width as usize + x as usize]
    }

    /// Arithmetic mean of all pixel values.
    pub fn mean_value(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// Binarizes at a fixed threshold; a pixel maps to foreground iff its
    /// value is `>= t`, so `t = 0` marks everything foreground.
    pub fn binarize_fixed(&self, t: f64) -> BinaryMap {
        assert!((0.0..=1.0).contains(&t), "threshold {t} outside [0, 1]");
        BinaryMap {
            dims: self.dims,
            values: self.values.iter().map(|&v| v >= t).collect(),
        }
    }

    /// Image-dependent adaptive binarization at twice the map mean, clamped
    /// to `1 - 1e-9`. A zero-mean map has no foreground evidence and produces
    /// an all-background output.
    pub fn binarize_adaptive(&self) -> BinaryMap {
        let mean = self.mean_value();
        if mean == 0.0 {
            return BinaryMap {
                dims: self.dims,
                values: vec![false; self.values.len()],
            };
        }
        let t = (2.0 * mean).min(1.0 - ADAPTIVE_CLAMP_EPSILON);
        self.binarize_fixed(t)
    }
}

/// Pixel grid with values restricted to {0, 1}, stored as `bool`s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMap {
    dims: Dimensions,
    values: Vec<bool>,
}

impl BinaryMap {
    pub fn new(dims: Dimensions, values: Vec<bool>) -> Result<Self, Error> {
        if values.len() != dims.pixel_count() {
            return Err(Error::LengthMismatch { dims, actual: values.len() });
        }
        Ok(BinaryMap { dims, values })
    }

    /// Builds a map by evaluating `f` at every `(x, y)` in row-major order.
    pub fn from_fn(dims: Dimensions, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut values = Vec::with_capacity(dims.pixel_count());
        for y in 0..dims.height {
            for x in 0..dims.width {
                values.push(f(x, y));
            }
        }
        BinaryMap { dims, values }
    }

    pub fn dimensions(&self) -> Dimensions {
        self.dims
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.values[y as usize * self.dims.width as usize + x as usize]
    }

    pub fn count_foreground(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// `Some(v)` when every pixel equals `v`.
    pub fn constant_value(&self) -> Option<bool> {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first).then_some(first)
    }

    /// Fraction of foreground pixels, i.e. the arithmetic mean.
    pub fn mean_value(&self) -> f64 {
        self.count_foreground() as f64 / self.values.len() as f64
    }

    /// Flips every pixel.
    pub fn complement(&self) -> BinaryMap {
        BinaryMap {
            dims: self.dims,
            values: self.values.iter().map(|&v| !v).collect(),
        }
    }

    /// Nearest-neighbor resampling to `target`. Source pixel for output `x`
    /// is `floor(x * src_w / dst_w)`, and likewise for rows.
    pub fn resize_nn(&self, target: Dimensions) -> BinaryMap {
        if target == self.dims {
            return self.clone();
        }
        let (sw, sh) = (self.dims.width as u64, self.dims.height as u64);
        let (tw, th) = (target.width as u64, target.height as u64);
        BinaryMap::from_fn(target, |x, y| {
            let sx = (x as u64 * sw / tw) as u32;
            let sy = (y as u64 * sh / th) as u32;
            self.get(sx, sy)
        })
    }
}

/// How a model map on disk becomes a [`BinaryMap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// The file is already binary: any byte >= 128 loads as foreground.
    AsIs,
    /// Fixed threshold in `[0, 1]` applied to the gray values.
    Fixed(f64),
    /// Image-dependent adaptive threshold (twice the map mean).
    Adaptive,
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMode::AsIs => write!(f, "asis"),
            ThresholdMode::Fixed(t) => write!(f, "fixed:{t}"),
            ThresholdMode::Adaptive => write!(f, "adaptive"),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "asis" => Ok(ThresholdMode::AsIs),
            "adaptive" => Ok(ThresholdMode::Adaptive),
            _ => {
                let t = s
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|t| (0.0..=1.0).contains(t))
                    .ok_or_else(|| Error::InvalidThresholdMode(s.to_string()))?;
                Ok(ThresholdMode::Fixed(t))
            }
        }
    }
}

/// Byte value that separates background from foreground in binary files.
const BINARY_BYTE_THRESHOLD: f64 = 128.0 / 255.0;

/// Loads an 8-bit grayscale or RGB raster file and scales bytes to `[0, 1]`.
/// RGB inputs are reduced by channel average before scaling.
pub fn load_gray(path: &Path) -> Result<GrayMap, Error> {
    let img = image::open(path).map_err(|source| Error::ImageRead {
        path: path.to_path_buf(),
        source,
    })?;
    let dims = Dimensions::new(img.width(), img.height())?;
    let values: Vec<f64> = match img {
        image::DynamicImage::ImageLuma8(buf) => {
            buf.into_raw().into_iter().map(|b| b as f64 / 255.0).collect()
        }
        image::DynamicImage::ImageRgb8(buf) => buf
            .into_raw()
            .chunks_exact(3)
            .map(|px| (px[0] as f64 + px[1] as f64 + px[2] as f64) / (3.0 * 255.0))
            .collect(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                format: format!("{:?}", other.color()),
            });
        }
    };
    GrayMap::new(dims, values)
}

/// Loads a file that is declared binary: any byte >= 128 becomes foreground.
pub fn load_binary(path: &Path) -> Result<BinaryMap, Error> {
    Ok(load_gray(path)?.binarize_fixed(BINARY_BYTE_THRESHOLD))
}

/// Loads a model map under the given threshold mode.
pub fn load_with_mode(path: &Path, mode: ThresholdMode) -> Result<BinaryMap, Error> {
    match mode {
        ThresholdMode::AsIs => load_binary(path),
        ThresholdMode::Fixed(t) => Ok(load_gray(path)?.binarize_fixed(t)),
        ThresholdMode::Adaptive => Ok(load_gray(path)?.binarize_adaptive()),
    }
}

/// Writes a gray map as an 8-bit grayscale PNG (values scaled by 255).
pub fn save_gray(map: &GrayMap, path: &Path) -> Result<(), Error> {
    let bytes: Vec<u8> = map.values().iter().map(|&v| (v * 255.0).round() as u8).collect();
    save_luma8(bytes, map.dimensions(), path)
}

/// Writes a binary map as an 8-bit grayscale PNG using bytes 0 and 255.
pub fn save_binary(map: &BinaryMap, path: &Path) -> Result<(), Error> {
    let bytes: Vec<u8> = map.values().iter().map(|&v| if v { 255u8 } else { 0u8 }).collect();
    save_luma8(bytes, map.dimensions(), path)
}

fn save_luma8(bytes: Vec<u8>, dims: Dimensions, path: &Path) -> Result<(), Error> {
    let buf = image::GrayImage::from_raw(dims.width(), dims.height(), bytes)
        .expect("byte buffer length matches dimensions");
    buf.save(path).map_err(|source| Error::ImageWrite {
        path: path.to_path_buf(),
        source,
    })
}
