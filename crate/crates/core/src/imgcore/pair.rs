use rand::Rng;

use super::{add_gaussian_noise, darken, gaussian_blur, jpeg_degrade, DegradationKind, Image};
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Distinguishable,
    Indistinguishable,
}

/// Decides whether an original/degraded pair forms an effective contrast.
pub trait ContrastJudge {
    fn judge(&self, original: &Image, degraded: &Image, kind: &DegradationKind) -> Result<Verdict>;
}

/// Distinguishable iff the mean absolute pixel difference reaches `threshold`.
pub fn default_contrast_judge(
    original: &Image,
    degraded: &Image,
    threshold: f64,
) -> Result<Verdict> {
    let diff = original.mean_abs_diff(degraded)?;
    Ok(if diff >= threshold {
        Verdict::Distinguishable
    } else {
        Verdict::Indistinguishable
    })
}

#[derive(Clone, Copy, Debug)]
pub struct PixelDifferenceJudge {
    pub threshold: f64,
}

impl Default for PixelDifferenceJudge {
    fn default() -> Self {
        Self { threshold: 1.0 }
    }
}

impl ContrastJudge for PixelDifferenceJudge {
    fn judge(&self, original: &Image, degraded: &Image, _: &DegradationKind) -> Result<Verdict> {
        default_contrast_judge(original, degraded, self.threshold)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysAccept;

impl ContrastJudge for AlwaysAccept {
    fn judge(&self, _: &Image, _: &Image, _: &DegradationKind) -> Result<Verdict> {
        Ok(Verdict::Distinguishable)
    }
}

impl<F> ContrastJudge for F
where
    F: Fn(&Image, &Image, &DegradationKind) -> Result<Verdict>,
{
    fn judge(&self, original: &Image, degraded: &Image, kind: &DegradationKind) -> Result<Verdict> {
        self(original, degraded, kind)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairedSample {
    pub original: Image,
    pub degraded: Image,
    pub degradation: DegradationKind,
    pub mos: f64,
    pub filter_attempts: usize,
}

impl DegradationKind {
    /// Applies the operator. `seed` drives the noise stream and is ignored by
    /// the deterministic operators.
    pub fn apply(&self, img: &Image, seed: u64) -> Result<Image> {
        match *self {
            DegradationKind::Noise { sigma } => add_gaussian_noise(img, sigma, &mut seeded(seed)),
            DegradationKind::Blur { radius } => gaussian_blur(img, radius),
            DegradationKind::Jpeg { quality, repeats } => jpeg_degrade(img, quality, repeats),
            DegradationKind::Darken { lambda } => darken(img, lambda),
        }
    }
}

/// Draws a default-strength degradation, asks the judge, and resamples the
/// degradation type until the pair is accepted.
///
/// Every attempt consumes two words from `rng`: the top two bits of the first
/// select the operator (uniform over the four kinds), the second seeds the
/// operator's own noise stream.
pub fn build_pair<J, R>(
    img: &Image,
    mos: f64,
    judge: &J,
    rng: &mut R,
    max_attempts: usize,
) -> Result<PairedSample>
where
    J: ContrastJudge + ?Sized,
    R: Rng + ?Sized,
{
    if !(1.0..=5.0).contains(&mos) {
        return Err(Error::OutOfRange {
            value: mos,
            min: 1.0,
            max: 5.0,
        });
    }
    if max_attempts == 0 {
        return Err(Error::InvalidParameter(
            "max_attempts must be at least 1".into(),
        ));
    }
    let kinds = DegradationKind::defaults();
    for attempt in 1..=max_attempts {
        let kind = kinds[(rng.next_u64() >> 62) as usize];
        let op_seed = rng.next_u64();
        let degraded = kind.apply(img, op_seed)?;
        if judge.judge(img, &degraded, &kind)? == Verdict::Distinguishable {
            return Ok(PairedSample {
                original: img.clone(),
                degraded,
                degradation: kind,
                mos,
                filter_attempts: attempt,
            });
        }
    }
    Err(Error::FilterExhausted {
        attempts: max_attempts,
    })
}
