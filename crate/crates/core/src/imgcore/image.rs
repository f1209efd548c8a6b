use crate::{Error, Result};

/// 8-bit raster, row-major, channels interleaved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "unsupported channel count {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("empty image".into()));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "expected {} samples, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Builds a grayscale image from a generator `f(x, y)`; values are rounded
    /// and clamped to [0, 255].
    pub fn from_fn_gray(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(quantize(f(x, y)));
            }
        }
        Self::new(width, height, 1, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.width, self.height, self.channels)
    }

    /// Applies `f` to every sample, keeping the shape.
    pub(crate) fn map_samples(&self, mut f: impl FnMut(u8) -> u8) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Splits into per-channel planes of f64.
    pub(crate) fn planes(&self) -> Vec<Vec<f64>> {
        (0..self.channels)
            .map(|c| {
                self.pixels
                    .iter()
                    .skip(c)
                    .step_by(self.channels)
                    .map(|&p| p as f64)
                    .collect()
            })
            .collect()
    }

    /// Inverse of [`Image::planes`]; rounds and clamps.
    pub(crate) fn from_planes(width: usize, height: usize, planes: &[Vec<f64>]) -> Image {
        let channels = planes.len();
        let mut pixels = vec![0u8; width * height * channels];
        for (c, plane) in planes.iter().enumerate() {
            for (i, &v) in plane.iter().enumerate() {
                pixels[i * channels + c] = quantize(v);
            }
        }
        Image {
            width,
            height,
            channels,
            pixels,
        }
    }

    /// Luminance plane (Rec. 601 weights for RGB).
    pub fn luma(&self) -> Vec<f64> {
        match self.channels {
            1 => self.pixels.iter().map(|&p| p as f64).collect(),
            _ => self
                .pixels
                .chunks_exact(3)
                .map(|px| 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64)
                .collect(),
        }
    }

    pub fn mean_abs_diff(&self, other: &Image) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch {
                left: self.shape_string(),
                right: other.shape_string(),
            });
        }
        let total: u64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs() as u64)
            .sum();
        Ok(total as f64 / self.pixels.len() as f64)
    }
}

/// Round half away from zero, clamp to the 8-bit range.
pub(crate) fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}
