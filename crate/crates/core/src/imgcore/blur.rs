use super::image::Image;
use crate::{Error, Result};

/// Normalized 1-D Gaussian taps for offsets `-h..=h`, `h = ceil(3 sigma)`.
fn kernel(sigma: f64) -> Vec<f64> {
    let half = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-half..=half)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Gaussian blur with standard deviation `radius`, clamp-to-edge borders.
///
/// The normalized 2-D Gaussian is the outer product of two normalized 1-D
/// kernels, so it is applied as a horizontal then a vertical pass in f64 with
/// a single rounding at the end.
pub fn gaussian_blur(img: &Image, radius: f64) -> Result<Image> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidParameter(format!("blur radius {radius}")));
    }
    if radius == 0.0 {
        return Ok(img.clone());
    }
    let taps = kernel(radius);
    let half = (taps.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let planes: Vec<Vec<f64>> = img
        .planes()
        .into_iter()
        .map(|plane| {
            let mut tmp = vec![0.0; w * h];
            for y in 0..h {
                for x in 0..w {
                    tmp[y * w + x] = taps
                        .iter()
                        .enumerate()
                        .map(|(k, t)| t * plane[y * w + clamp(x as isize + k as isize - half, w)])
                        .sum();
                }
            }
            let mut out = vec![0.0; w * h];
            for y in 0..h {
                for x in 0..w {
                    out[y * w + x] = taps
                        .iter()
                        .enumerate()
                        .map(|(k, t)| t * tmp[clamp(y as isize + k as isize - half, h) * w + x])
                        .sum();
                }
            }
            out
        })
        .collect();
    Ok(Image::from_planes(w, h, &planes))
}
