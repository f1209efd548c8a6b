use super::image::{quantize, Image};
use crate::{Error, Result};

/// Scales every sample by `lambda` in (0, 1].
pub fn darken(img: &Image, lambda: f64) -> Result<Image> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("darken lambda {lambda}")));
    }
    Ok(img.map_samples(|p| quantize(p as f64 * lambda)))
}
