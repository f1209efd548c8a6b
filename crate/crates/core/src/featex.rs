//! Handcrafted quality features: the visual signal the policy conditions on.

use serde::{Deserialize, Serialize};

use crate::imgcore::Image;

pub const NUM_FEATURES: usize = 6;

/// Fixed affine standardization, `(raw - center) / scale` per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub center: [f64; NUM_FEATURES],
    pub scale: [f64; NUM_FEATURES],
}

impl Default for Standardization {
    fn default() -> Self {
        Self {
            center: [120.0, 44.0, 7500.0, 15.0, 1.1, 0.0],
            scale: [14.0, 14.0, 11000.0, 16.0, 0.8, 0.5],
        }
    }
}

impl Standardization {
    pub fn identity() -> Self {
        Self {
            center: [0.0; NUM_FEATURES],
            scale: [1.0; NUM_FEATURES],
        }
    }

    pub fn validate(&self) -> bool {
        self.center.iter().all(|c| c.is_finite())
            && self.scale.iter().all(|s| s.is_finite() && *s > 0.0)
    }
}

/// Index of each coordinate in a [`FeatureVector`].
pub mod index {
    pub const MEAN_LUMA: usize = 0;
    pub const LUMA_STD: usize = 1;
    pub const SHARPNESS: usize = 2;
    pub const NOISE: usize = 3;
    pub const BLOCKINESS: usize = 4;
    pub const SATURATION: usize = 5;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn zeros() -> Self {
        FeatureVector([0.0; NUM_FEATURES])
    }

    pub fn values(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Unstandardized statistics.
pub fn raw_statistics(img: &Image) -> [f64; NUM_FEATURES] {
    let (w, h) = (img.width(), img.height());
    let luma = img.luma();
    let n = luma.len() as f64;
    let mean = luma.iter().sum::<f64>() / n;
    let std = (luma.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();

    // 4-neighbour Laplacian and high-pass residual over interior pixels.
    let mut lap = Vec::new();
    if w >= 3 && h >= 3 {
        lap.reserve((w - 2) * (h - 2));
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let c = luma[y * w + x];
                let nb = luma[y * w + x - 1]
                    + luma[y * w + x + 1]
                    + luma[(y - 1) * w + x]
                    + luma[(y + 1) * w + x];
                lap.push(nb - 4.0 * c);
            }
        }
    }
    let sharpness = variance(&lap);
    // residual c - mean(neighbours) = -lap / 4; for white noise its std is
    // sigma * sqrt(1.25), hence the normalization.
    let residual: Vec<f64> = lap.iter().map(|l| -l / 4.0).collect();
    let noise = 1.4826 * mad(&residual) / 1.25f64.sqrt();

    let blockiness = blockiness(&luma, w, h);
    let saturation = if img.channels() == 3 {
        img.pixels()
            .chunks_exact(3)
            .map(|px| {
                let max = px.iter().copied().max().unwrap() as f64;
                let min = px.iter().copied().min().unwrap() as f64;
                if max > 0.0 {
                    (max - min) / max
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / n
    } else {
        0.0
    };
    [mean, std, sharpness, noise, blockiness, saturation]
}

/// Computes and standardizes the six quality statistics.
pub fn extract(img: &Image, std: &Standardization) -> FeatureVector {
    let raw = raw_statistics(img);
    let mut out = [0.0; NUM_FEATURES];
    for i in 0..NUM_FEATURES {
        out[i] = (raw[i] - std.center[i]) / std.scale[i];
    }
    FeatureVector(out)
}

fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

fn mad(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
    median(&mut dev)
}

/// Mean absolute step across 8-pixel block boundaries over the mean absolute
/// step elsewhere, both floored by one intensity level so flat images score 1.
fn blockiness(luma: &[f64], w: usize, h: usize) -> f64 {
    let (mut on_sum, mut on_n, mut off_sum, mut off_n) = (0.0, 0usize, 0.0, 0usize);
    let mut push = |boundary: bool, d: f64| {
        if boundary {
            on_sum += d;
            on_n += 1;
        } else {
            off_sum += d;
            off_n += 1;
        }
    };
    for y in 0..h {
        for x in 1..w {
            push(x % 8 == 0, (luma[y * w + x] - luma[y * w + x - 1]).abs());
        }
    }
    for y in 1..h {
        for x in 0..w {
            push(y % 8 == 0, (luma[y * w + x] - luma[(y - 1) * w + x]).abs());
        }
    }
    let on = if on_n > 0 { on_sum / on_n as f64 } else { 0.0 };
    let off = if off_n > 0 {
        off_sum / off_n as f64
    } else {
        0.0
    };
    (on + 1.0) / (off + 1.0)
}
