use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::image::{quantize, Image};
use crate::{Error, Result};

/// Adds i.i.d. zero-mean Gaussian noise to every sample (each channel drawn
/// independently), then rounds and clamps.
pub fn add_gaussian_noise<R: Rng + ?Sized>(img: &Image, sigma: f64, rng: &mut R) -> Result<Image> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise sigma {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(img.map_samples(|p| quantize(p as f64 + normal.sample(rng))))
}
